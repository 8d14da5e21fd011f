mod common;

use common::*;
use geoscatter::wavelets::dyadic_diffusion;
use geoscatter::{wavelet_transform, Graph};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_graph(max_n: usize) -> impl Strategy<Value = (Graph, u64)> {
    (2..=max_n, any::<u64>(), 0.0..0.6f64, any::<bool>()).prop_map(|(n, seed, extra, weighted)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (random_connected_graph(&mut rng, n, extra, weighted), seed)
    })
}

#[test]
fn path_diffusion_matches_dense_powers() {
    let g = Graph::from_unweighted(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
    let x = random_signal(&mut ChaCha8Rng::seed_from_u64(5), 5);
    let p = dense_walk(&g);
    let stack = dyadic_diffusion(&g, &x, 3).unwrap();
    assert_eq!(stack.len(), 4);
    for (j, v) in stack.iter().enumerate() {
        let oracle = mat_vec(&mat_pow(&p, 1 << j), &x);
        assert!(max_abs_diff(v, &oracle) <= 1e-10, "j = {j}");
    }
}

#[test]
fn wavelets_match_dense_matrices_up_to_twenty_vertices() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for n in 2..=20 {
        let g = random_connected_graph(&mut rng, n, 0.3, n % 2 == 1);
        let x = random_signal(&mut rng, n);
        let scales = 1 + n % 4;
        let psi = dense_wavelets(&g, scales);
        let w = wavelet_transform(&g, &x, scales).unwrap();
        for j in 1..=scales {
            assert!(max_abs_diff(w.scale(j), &mat_vec(&psi[j - 1], &x)) <= 1e-10);
        }
        let lowpass = mat_vec(&mat_pow(&dense_walk(&g), 1 << scales), &x);
        assert!(max_abs_diff(&w.lowpass, &lowpass) <= 1e-10);
    }
}

#[test]
fn laplacian_matches_fixture_eigenpairs() {
    for f in spectral_fixtures() {
        let g = f.graph();
        let lap = g.normalized_laplacian().unwrap();
        assert!(f.eigenvalues[0].abs() <= 1e-12, "{}", f.name);
        assert!(f.eigenvalues[1] > 0.0, "{} is connected", f.name);
        for (k, (lam, phi)) in f.eigenvalues.iter().zip(&f.eigenvectors).enumerate() {
            assert!((0.0..=2.0).contains(lam));
            let lhs = lap.apply(phi).unwrap();
            let rhs: Vec<f64> = phi.iter().map(|p| lam * p).collect();
            assert!(max_abs_diff(&lhs, &rhs) <= 1e-8, "{} mode {k}", f.name);
        }
        // φ_0 ∝ d^{1/2}
        let sqrt_d: Vec<f64> = g.degree().iter().map(|d| d.sqrt()).collect();
        let norm = sqrt_d.iter().map(|v| v * v).sum::<f64>().sqrt();
        let sign = f.eigenvectors[0][0].signum();
        let phi0: Vec<f64> = f.eigenvectors[0].iter().map(|v| v * sign).collect();
        let unit: Vec<f64> = sqrt_d.iter().map(|v| v / norm).collect();
        assert!(max_abs_diff(&phi0, &unit) <= 1e-8, "{}", f.name);
    }
}

#[test]
fn walk_eigenvectors_from_fixtures() {
    for f in spectral_fixtures() {
        let g = f.graph();
        for (lam, phi) in f.eigenvalues.iter().zip(&f.eigenvectors) {
            let omega = 1.0 - lam / 2.0;
            let big_phi: Vec<f64> = phi.iter().zip(g.degree()).map(|(p, d)| d.sqrt() * p).collect();
            let lhs = g.lazy_walk(&big_phi).unwrap();
            let rhs: Vec<f64> = big_phi.iter().map(|v| omega * v).collect();
            assert!(max_abs_diff(&lhs, &rhs) <= 1e-8, "{}", f.name);
        }
    }
}

#[test]
fn modes_decay_as_powers_of_walk_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for f in spectral_fixtures() {
        let g = f.graph();
        let x = random_signal(&mut rng, f.n);
        let inv_sqrt_d: Vec<f64> = g.degree().iter().map(|d| 1.0 / d.sqrt()).collect();
        let coeffs = |v: &[f64]| -> Vec<f64> {
            let y: Vec<f64> = v.iter().zip(&inv_sqrt_d).map(|(a, b)| a * b).collect();
            f.eigenvectors
                .iter()
                .map(|phi| phi.iter().zip(&y).map(|(a, b)| a * b).sum())
                .collect()
        };
        let base = coeffs(&x);
        for t in [1usize, 2, 4] {
            let mut xt = x.clone();
            for _ in 0..t {
                xt = g.lazy_walk(&xt).unwrap();
            }
            let expected: Vec<f64> = base
                .iter()
                .zip(&f.eigenvalues)
                .map(|(c, lam)| (1.0 - lam / 2.0).powi(t as i32) * c)
                .collect();
            assert!(max_abs_diff(&coeffs(&xt), &expected) <= 1e-8, "{} t = {t}", f.name);
            assert!((coeffs(&xt)[0] - base[0]).abs() <= 1e-12, "zero frequency kept");
        }
    }
}

#[test]
fn probability_vectors_stay_probability_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g = random_connected_graph(&mut rng, 12, 0.2, true);
    let mut mu = vec![0.0; 12];
    mu[3] = 1.0;
    for _ in 0..10 {
        mu = g.lazy_walk(&mu).unwrap();
        assert!(mu.iter().all(|&v| v >= 0.0));
        assert!((mu.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn components_examples() {
    let k3 = Graph::from_unweighted(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
    assert_eq!(k3.connected_components(), vec![vec![0, 1, 2]]);
    let two = Graph::from_unweighted(4, &[(0, 1), (2, 3)]).unwrap();
    assert_eq!(two.connected_components().len(), 2);
    let single = Graph::from_unweighted(1, &[]).unwrap();
    assert_eq!(single.connected_components(), vec![vec![0]]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lazy_walk_preserves_mass((g, seed) in arb_graph(25)) {
        let x = random_signal(&mut ChaCha8Rng::seed_from_u64(seed ^ 1), g.n());
        let px = g.lazy_walk(&x).unwrap();
        prop_assert!((px.iter().sum::<f64>() - x.iter().sum::<f64>()).abs() <= 1e-10);
    }

    #[test]
    fn lazy_walk_is_linear((g, seed) in arb_graph(25), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let x = random_signal(&mut rng, g.n());
        let y = random_signal(&mut rng, g.n());
        let combo: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
        let lhs = g.lazy_walk(&combo).unwrap();
        let px = g.lazy_walk(&x).unwrap();
        let py = g.lazy_walk(&y).unwrap();
        let rhs: Vec<f64> = px.iter().zip(&py).map(|(u, v)| a * u + b * v).collect();
        prop_assert!(max_abs_diff(&lhs, &rhs) <= 1e-10);
    }

    #[test]
    fn wavelets_sum_to_zero((g, seed) in arb_graph(30), scales in 1usize..=6) {
        let x = random_signal(&mut ChaCha8Rng::seed_from_u64(seed ^ 3), g.n());
        let l1: f64 = x.iter().map(|v| v.abs()).sum();
        let w = wavelet_transform(&g, &x, scales).unwrap();
        for c in &w.coeffs {
            prop_assert!(c.iter().sum::<f64>().abs() <= 1e-9 * l1);
        }
    }

    #[test]
    fn wavelets_telescope((g, seed) in arb_graph(30), scales in 1usize..=6) {
        let x = random_signal(&mut ChaCha8Rng::seed_from_u64(seed ^ 4), g.n());
        let w = wavelet_transform(&g, &x, scales).unwrap();
        let px = g.lazy_walk(&x).unwrap();
        for v in 0..g.n() {
            let total: f64 = w.coeffs.iter().map(|c| c[v]).sum();
            prop_assert!((total - (px[v] - w.lowpass[v])).abs() <= 1e-10);
        }
    }

    #[test]
    fn wavelets_are_permutation_equivariant((g, seed) in arb_graph(30), scales in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 5);
        let x = random_signal(&mut rng, g.n());
        let perm = random_permutation(&mut rng, g.n());
        let w = wavelet_transform(&g, &x, scales).unwrap();
        let wp = wavelet_transform(&g.permuted(&perm).unwrap(), &permute(&x, &perm), scales).unwrap();
        for j in 1..=scales {
            prop_assert!(max_abs_diff(wp.scale(j), &permute(w.scale(j), &perm)) <= 1e-12);
        }
    }

    #[test]
    fn degree_is_annihilated((g, _seed) in arb_graph(30), scales in 1usize..=6) {
        let d = g.degree().to_vec();
        let w = wavelet_transform(&g, &d, scales).unwrap();
        for c in &w.coeffs {
            prop_assert!(c.iter().all(|v| v.abs() <= 1e-10));
        }
    }
}
