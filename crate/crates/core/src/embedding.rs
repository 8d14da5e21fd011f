//! PCA over feature vectors, per-class affine subspaces, and the class
//! exchange-preference analysis built from subspace projection distances.

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbeddingError {
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("expected dimension {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("class {class} has {members} members; at least 2 are required")]
    ClassTooSmall { class: usize, members: usize },
    #[error("class {0} has zero distance to its own subspace")]
    ZeroSelfDistance(usize),
    #[error("threshold {0} outside (0, 1]")]
    InvalidThreshold(f64),
}

/// Principal components of a sample, ordered by decreasing variance.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Orthonormal directions, one per feature dimension.
    pub components: Vec<Vec<f64>>,
    /// Sample variance along each component (divide-by-(m−1)), non-increasing.
    pub variances: Vec<f64>,
    /// Cumulative explained-variance fraction after each component.
    pub explained_ratio: Vec<f64>,
    /// All variances are zero; no component explains anything.
    pub degenerate: bool,
}

fn check_rows(x: &[Vec<f64>]) -> Result<usize, EmbeddingError> {
    if x.len() < 2 {
        return Err(EmbeddingError::TooFewSamples(x.len()));
    }
    let dim = x[0].len();
    if let Some(row) = x.iter().find(|r| r.len() != dim) {
        return Err(EmbeddingError::DimensionMismatch {
            expected: dim,
            actual: row.len(),
        });
    }
    Ok(dim)
}

/// Fits PCA by eigendecomposition of the sample covariance. Each component's
/// largest-magnitude entry is made positive.
pub fn pca_fit(x: &[Vec<f64>]) -> Result<PcaModel, EmbeddingError> {
    let dim = check_rows(x)?;
    let m = x.len();
    let mut mean = vec![0.0; dim];
    for row in x {
        for (acc, v) in mean.iter_mut().zip(row) {
            *acc += v;
        }
    }
    mean.iter_mut().for_each(|v| *v /= m as f64);
    let centered = DMatrix::from_fn(m, dim, |i, j| x[i][j] - mean[j]);
    let cov = (centered.transpose() * &centered) / (m as f64 - 1.0);
    let eigen = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]).then(a.cmp(&b)));
    let variances: Vec<f64> = order.iter().map(|&k| eigen.eigenvalues[k].max(0.0)).collect();
    let components = order
        .iter()
        .map(|&k| {
            let mut c: Vec<f64> = eigen.eigenvectors.column(k).iter().copied().collect();
            let pivot = c
                .iter()
                .copied()
                .fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best });
            if pivot < 0.0 {
                c.iter_mut().for_each(|v| *v = -*v);
            }
            c
        })
        .collect();

    let total: f64 = variances.iter().sum();
    let magnitude = 1.0 + mean.iter().map(|v| v * v).sum::<f64>();
    // identical rows leave only rounding noise in the covariance
    let degenerate = !(total > 1024.0 * f64::EPSILON * f64::EPSILON * magnitude);
    let explained_ratio = if degenerate {
        vec![0.0; dim]
    } else {
        variances
            .iter()
            .scan(0.0, |acc, v| {
                *acc += v;
                Some((*acc / total).min(1.0))
            })
            .collect()
    };
    Ok(PcaModel {
        mean,
        components,
        variances,
        explained_ratio,
        degenerate,
    })
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Smallest number of components whose cumulative explained variance
    /// reaches `fraction`; zero for degenerate data.
    pub fn threshold_dimension(&self, fraction: f64) -> usize {
        if self.degenerate {
            return 0;
        }
        // cumulative sums can land a few ulps short of the target
        let target = fraction - 1e-12;
        self.explained_ratio
            .iter()
            .position(|&r| r >= target)
            .map_or(self.explained_ratio.len(), |k| k + 1)
    }

    /// Coordinates of `v` along the first `k` components.
    pub fn project(&self, v: &[f64], k: usize) -> Vec<f64> {
        self.components[..k]
            .iter()
            .map(|c| c.iter().zip(v).zip(&self.mean).map(|((ci, vi), mi)| ci * (vi - mi)).sum())
            .collect()
    }

    /// Maps component coordinates back to feature space.
    pub fn reconstruct(&self, coords: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (c, &a) in self.components.iter().zip(coords) {
            for (o, ci) in out.iter_mut().zip(c) {
                *o += a * ci;
            }
        }
        out
    }

    /// Keeps the leading components reaching `threshold` explained variance.
    pub fn truncate(&self, threshold: f64) -> Result<ClassSubspace, EmbeddingError> {
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(EmbeddingError::InvalidThreshold(threshold));
        }
        let k = self.threshold_dimension(threshold);
        Ok(ClassSubspace {
            class: 0,
            mean: self.mean.clone(),
            basis: self.components[..k].to_vec(),
            threshold,
        })
    }
}

/// Affine subspace `mean + span(basis)` fitted to one class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassSubspace {
    pub class: usize,
    pub mean: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
    pub threshold: f64,
}

impl ClassSubspace {
    pub fn fit(class: usize, samples: &[Vec<f64>], threshold: f64) -> Result<Self, EmbeddingError> {
        let mut s = pca_fit(samples)?.truncate(threshold)?;
        s.class = class;
        Ok(s)
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

/// Norm of the part of `v − mean` orthogonal to the subspace basis.
pub fn subspace_distance(v: &[f64], s: &ClassSubspace) -> Result<f64, EmbeddingError> {
    if v.len() != s.mean.len() {
        return Err(EmbeddingError::DimensionMismatch {
            expected: s.mean.len(),
            actual: v.len(),
        });
    }
    let mut residual: Vec<f64> = v.iter().zip(&s.mean).map(|(a, b)| a - b).collect();
    for b in &s.basis {
        let c: f64 = b.iter().zip(&residual).map(|(x, y)| x * y).sum();
        for (r, bi) in residual.iter_mut().zip(b) {
            *r -= c * bi;
        }
    }
    Ok(residual.iter().map(|r| r * r).sum::<f64>().sqrt())
}

fn class_members(features: &[Vec<f64>], labels: &[usize]) -> Result<Vec<Vec<Vec<f64>>>, EmbeddingError> {
    if features.len() != labels.len() {
        return Err(EmbeddingError::DimensionMismatch {
            expected: features.len(),
            actual: labels.len(),
        });
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut members = vec![Vec::new(); classes];
    for (f, &l) in features.iter().zip(labels) {
        members[l].push(f.clone());
    }
    if let Some((class, m)) = members.iter().enumerate().find(|(_, m)| m.len() < 2) {
        return Err(EmbeddingError::ClassTooSmall {
            class,
            members: m.len(),
        });
    }
    Ok(members)
}

/// One subspace per class, each fit on all of that class's samples.
pub fn fit_class_subspaces(
    features: &[Vec<f64>],
    labels: &[usize],
    threshold: f64,
) -> Result<Vec<ClassSubspace>, EmbeddingError> {
    class_members(features, labels)?
        .iter()
        .enumerate()
        .map(|(c, m)| ClassSubspace::fit(c, m, threshold))
        .collect()
}

/// `distances[e][j]`: distance of sample `e` from the subspace of class `j`.
pub fn sample_distances(features: &[Vec<f64>], subspaces: &[ClassSubspace]) -> Result<Vec<Vec<f64>>, EmbeddingError> {
    features
        .iter()
        .map(|v| subspaces.iter().map(|s| subspace_distance(v, s)).collect())
        .collect()
}

/// `D(i, j)`: mean distance of class-`i` samples from class `j`'s subspace.
pub fn class_distance_matrix(
    features: &[Vec<f64>],
    labels: &[usize],
    threshold: f64,
) -> Result<Vec<Vec<f64>>, EmbeddingError> {
    let subspaces = fit_class_subspaces(features, labels, threshold)?;
    let distances = sample_distances(features, &subspaces)?;
    Ok(mean_by_class(&distances, labels, subspaces.len()))
}

fn mean_by_class(distances: &[Vec<f64>], labels: &[usize], classes: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; classes]; classes];
    let mut counts = vec![0usize; classes];
    for (row, &l) in distances.iter().zip(labels) {
        counts[l] += 1;
        for (acc, d) in sums[l].iter_mut().zip(row) {
            *acc += d;
        }
    }
    for (row, &c) in sums.iter_mut().zip(&counts) {
        row.iter_mut().for_each(|v| *v /= c as f64);
    }
    sums
}

#[derive(Debug, Clone, PartialEq)]
pub struct NearestSubspaceStats {
    /// 1-based rank of each sample's true class among subspace distances.
    pub ranks: Vec<usize>,
    /// Nearest class of each sample.
    pub nearest: Vec<usize>,
    /// `w_j`: fraction of class-`j` samples whose nearest subspace is not `j`.
    pub incoherence: Vec<f64>,
    /// `rank_fractions[j][r]`: fraction of class `j` with true-class rank `r + 1`.
    pub rank_fractions: Vec<Vec<f64>>,
    /// Fraction of all samples whose nearest subspace is their own class.
    pub true_nearest_fraction: f64,
    pub distance_matrix: Vec<Vec<f64>>,
}

/// Ranks each sample's true class among all class subspaces. Ties go to the
/// smaller class id.
pub fn nearest_subspace_stats(
    features: &[Vec<f64>],
    labels: &[usize],
    threshold: f64,
) -> Result<NearestSubspaceStats, EmbeddingError> {
    let subspaces = fit_class_subspaces(features, labels, threshold)?;
    let distances = sample_distances(features, &subspaces)?;
    let classes = subspaces.len();
    let mut ranks = Vec::with_capacity(labels.len());
    let mut nearest = Vec::with_capacity(labels.len());
    for (row, &l) in distances.iter().zip(labels) {
        let mut order: Vec<usize> = (0..classes).collect();
        order.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
        nearest.push(order[0]);
        ranks.push(order.iter().position(|&c| c == l).unwrap_or(classes - 1) + 1);
    }
    let mut counts = vec![0usize; classes];
    let mut rank_counts = vec![vec![0usize; classes]; classes];
    for (&l, &r) in labels.iter().zip(&ranks) {
        counts[l] += 1;
        rank_counts[l][r - 1] += 1;
    }
    let rank_fractions: Vec<Vec<f64>> = rank_counts
        .iter()
        .zip(&counts)
        .map(|(row, &c)| row.iter().map(|&k| k as f64 / c as f64).collect())
        .collect();
    let incoherence = rank_fractions.iter().map(|row| 1.0 - row[0]).collect();
    let true_nearest_fraction = ranks.iter().filter(|&&r| r == 1).count() as f64 / labels.len() as f64;
    Ok(NearestSubspaceStats {
        ranks,
        nearest,
        incoherence,
        rank_fractions,
        true_nearest_fraction,
        distance_matrix: mean_by_class(&distances, labels, classes),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceMatrix {
    pub distances: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// `pref[i][j]` for `i ≠ j`; the diagonal is zero.
    pub pref: Vec<Vec<f64>>,
}

/// `min{D(i,j)/D(i,i), D(j,i)/D(j,j)}`, symmetric in `i` and `j`.
pub fn relative_separation(d: &[Vec<f64>], i: usize, j: usize) -> f64 {
    (d[i][j] / d[i][i]).min(d[j][i] / d[j][j])
}

/// `pref(i, j) = w_j / min{D(i,j)/D(i,i), D(j,i)/D(j,j)}` off the diagonal.
pub fn ec_preference(d: &[Vec<f64>], w: &[f64]) -> Result<PreferenceMatrix, EmbeddingError> {
    let c = d.len();
    if w.len() != c {
        return Err(EmbeddingError::DimensionMismatch { expected: c, actual: w.len() });
    }
    if let Some(row) = d.iter().find(|r| r.len() != c) {
        return Err(EmbeddingError::DimensionMismatch { expected: c, actual: row.len() });
    }
    if let Some(i) = (0..c).find(|&i| !(d[i][i] > 0.0)) {
        return Err(EmbeddingError::ZeroSelfDistance(i));
    }
    let pref = (0..c)
        .map(|i| {
            (0..c)
                .map(|j| if i == j { 0.0 } else { w[j] / relative_separation(d, i, j) })
                .collect()
        })
        .collect();
    Ok(PreferenceMatrix {
        distances: d.to_vec(),
        weights: w.to_vec(),
        pref,
    })
}
