//! Dense reference implementations and random generators shared by the
//! integration tests. Nothing here reuses library arithmetic: matrices are
//! materialized and powers are taken by repeated dense multiplication.

#![allow(dead_code)]

use geoscatter::{Graph, MomentMode};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Deserialize;

pub type Mat = Vec<Vec<f64>>;

pub fn identity(n: usize) -> Mat {
    (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect()
}

pub fn adjacency(g: &Graph) -> Mat {
    let n = g.n();
    let mut a = vec![vec![0.0; n]; n];
    for (u, v, w) in g.edges() {
        a[u][v] = w;
        a[v][u] = w;
    }
    a
}

/// `P = ½(I + A D⁻¹)` built entry by entry.
pub fn dense_walk(g: &Graph) -> Mat {
    let a = adjacency(g);
    let n = a.len();
    let d: Vec<f64> = (0..n).map(|v| a[v].iter().sum()).collect();
    (0..n)
        .map(|u| {
            (0..n)
                .map(|v| 0.5 * (if u == v { 1.0 } else { 0.0 } + a[u][v] / d[v]))
                .collect()
        })
        .collect()
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    (0..n)
        .map(|i| (0..m).map(|j| (0..k).map(|t| a[i][t] * b[t][j]).sum()).collect())
        .collect()
}

pub fn mat_pow(p: &Mat, t: usize) -> Mat {
    (0..t).fold(identity(p.len()), |acc, _| mat_mul(&acc, p))
}

pub fn mat_vec(a: &Mat, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum()).collect()
}

pub fn mat_sub(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect())
        .collect()
}

/// The wavelet matrices `Ψ_j = P^{2^{j-1}} − P^{2^j}` for `j = 1..=scales`.
pub fn dense_wavelets(g: &Graph, scales: usize) -> Vec<Mat> {
    let p = dense_walk(g);
    (1..=scales)
        .map(|j| mat_sub(&mat_pow(&p, 1 << (j - 1)), &mat_pow(&p, 1 << j)))
        .collect()
}

/// Power sums, or mean / variance / skewness / kurtosis by two-pass formulas.
pub fn oracle_moments(v: &[f64], moments: usize, mode: MomentMode) -> Vec<f64> {
    match mode {
        MomentMode::Unnormalized => (1..=moments)
            .map(|q| v.iter().map(|x| x.powi(q as i32)).sum())
            .collect(),
        MomentMode::Normalized => {
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let central = |k: i32| v.iter().map(|x| (x - mean).powi(k)).sum::<f64>() / n;
            let var = central(2);
            let all = [
                mean,
                var,
                if var < 1e-24 { 0.0 } else { central(3) / var.powf(1.5) },
                if var < 1e-24 { 0.0 } else { central(4) / (var * var) },
            ];
            all[..moments].to_vec()
        }
    }
}

/// Zeroth, first and second order moments of one signal, in library layout.
pub fn oracle_scatter(g: &Graph, x: &[f64], scales: usize, moments: usize, mode: MomentMode) -> Vec<f64> {
    let psi = dense_wavelets(g, scales);
    let mut out = oracle_moments(x, moments, mode);
    let first: Vec<Vec<f64>> = psi
        .iter()
        .map(|m| mat_vec(m, x).into_iter().map(f64::abs).collect())
        .collect();
    for u in &first {
        out.extend(oracle_moments(u, moments, mode));
    }
    for (j, u) in first.iter().enumerate() {
        for m in &psi[j + 1..] {
            let w: Vec<f64> = mat_vec(m, u).into_iter().map(f64::abs).collect();
            out.extend(oracle_moments(&w, moments, mode));
        }
    }
    out
}

/// A connected graph: a random spanning tree plus extra random edges.
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, extra: f64, weighted: bool) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut present = vec![vec![false; n]; n];
    let mut edges = Vec::new();
    let weight = |rng: &mut R| if weighted { rng.gen_range(0.2..3.0) } else { 1.0 };
    for i in 1..n {
        let u = order[i];
        let v = order[rng.gen_range(0..i)];
        present[u][v] = true;
        present[v][u] = true;
        let w = weight(rng);
        edges.push((u, v, w));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !present[u][v] && rng.gen_bool(extra) {
                let w = weight(rng);
                edges.push((u, v, w));
            }
        }
    }
    Graph::from_edges(n, &edges).expect("generated graph is valid")
}

pub fn random_signal<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()
}

pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// `y[perm[v]] = x[v]`.
pub fn permute<T: Copy + Default>(x: &[T], perm: &[usize]) -> Vec<T> {
    let mut y = vec![T::default(); x.len()];
    for (v, &p) in perm.iter().enumerate() {
        y[p] = x[v];
    }
    y
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `‖a − b‖_∞ / max(1, ‖b‖_∞)`.
pub fn relative_inf_error(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().map(|v| v.abs()).fold(1.0, f64::max);
    max_abs_diff(a, b) / scale
}

#[derive(Debug, Deserialize)]
pub struct SpectralFixture {
    pub name: String,
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
}

impl SpectralFixture {
    pub fn graph(&self) -> Graph {
        Graph::from_edges(self.n, &self.edges).unwrap()
    }
}

pub fn spectral_fixtures() -> Vec<SpectralFixture> {
    serde_json::from_str(include_str!("../fixtures/spectral.json")).unwrap()
}

/// Graph families used as the oracle fixture set: named small graphs plus
/// seeded random connected graphs, all with `n ≤ 15`.
pub fn oracle_fixture_set() -> Vec<(String, Graph)> {
    use rand::SeedableRng;
    let mut out = vec![
        ("K2".to_string(), Graph::from_unweighted(2, &[(0, 1)]).unwrap()),
        (
            "K3".to_string(),
            Graph::from_unweighted(3, &[(0, 1), (1, 2), (0, 2)]).unwrap(),
        ),
        (
            "P5".to_string(),
            Graph::from_unweighted(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap(),
        ),
        (
            "star6".to_string(),
            Graph::from_unweighted(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]).unwrap(),
        ),
        (
            "C8".to_string(),
            Graph::from_unweighted(8, &(0..8).map(|i| (i, (i + 1) % 8)).collect::<Vec<_>>()).unwrap(),
        ),
    ];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(15);
    for i in 0..40 {
        let n = rng.gen_range(2..=15);
        let extra = rng.gen_range(0.0..0.5);
        out.push((format!("random{i}"), random_connected_graph(&mut rng, n, extra, i % 2 == 0)));
    }
    out
}
