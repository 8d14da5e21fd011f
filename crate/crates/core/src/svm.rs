//! RBF-kernel support vector classification.
//!
//! The binary dual is solved by sequential minimal optimization with
//! second-order working-set selection (Fan, Chen & Lin 2005). Multi-class
//! problems use one-vs-one voting.

use log::warn;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SvmError {
    #[error("expected dimension {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("training labels contain a single class")]
    DegenerateLabels,
    #[error("kernel parameter gamma must be positive, got {0}")]
    InvalidGamma(f64),
    #[error("regularization C must be positive, got {0}")]
    InvalidC(f64),
    #[error("SMO did not converge within {iterations} iterations (KKT gap {gap:.3e})")]
    NonConvergence { iterations: usize, gap: f64 },
}

const TAU: f64 = 1e-12;
pub const DEFAULT_TOLERANCE: f64 = 1e-3;

fn squared_distance(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `exp(−γ ‖u − v‖²)`.
pub fn rbf_kernel(u: &[f64], v: &[f64], gamma: f64) -> Result<f64, SvmError> {
    if u.len() != v.len() {
        return Err(SvmError::DimensionMismatch {
            expected: u.len(),
            actual: v.len(),
        });
    }
    if !(gamma > 0.0) {
        return Err(SvmError::InvalidGamma(gamma));
    }
    Ok((-gamma * squared_distance(u, v)).exp())
}

/// Dense RBF Gram matrix of `x` (row-major, `n × n`).
pub fn rbf_gram(x: &[Vec<f64>], gamma: f64) -> Vec<f64> {
    let n = x.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        k[i * n + i] = 1.0;
        for j in 0..i {
            let v = (-gamma * squared_distance(&x[i], &x[j])).exp();
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

/// Solution of the binary dual problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    /// Decision function offset, `f(x) = Σ αᵢ yᵢ K(xᵢ, x) + bias`.
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Maximal KKT violation `m(α) − M(α)` at exit.
    pub kkt_gap: f64,
}

/// Solves `min ½ αᵀQα − 1ᵀα` s.t. `0 ≤ α ≤ C`, `yᵀα = 0` with
/// `Q_ij = y_i y_j K(i, j)`. `kernel(i, j)` indexes the training set.
pub fn solve_smo<K: Fn(usize, usize) -> f64>(
    kernel: K,
    y: &[f64],
    c: f64,
    tolerance: f64,
    max_iterations: usize,
) -> SmoSolution {
    let n = y.len();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let diag: Vec<f64> = (0..n).map(|i| kernel(i, i)).collect();
    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;

    let mut iterations = 0;
    let mut gap = f64::INFINITY;
    let mut converged = false;
    while iterations < max_iterations {
        // i: maximal violating index in I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            let in_up = if y[t] > 0.0 { !upper(alpha[t]) } else { !lower(alpha[t]) };
            if in_up && -y[t] * grad[t] >= gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        // j: second-order selection in I_low
        let mut gmin = f64::INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        if i != usize::MAX {
            for t in 0..n {
                let in_low = if y[t] > 0.0 { !lower(alpha[t]) } else { !upper(alpha[t]) };
                if !in_low {
                    continue;
                }
                let score = -y[t] * grad[t];
                gmin = gmin.min(score);
                let b = gmax - score;
                if b > 0.0 {
                    let mut a = diag[i] + diag[t] - 2.0 * kernel(i, t);
                    if a <= 0.0 {
                        a = TAU;
                    }
                    let obj = -(b * b) / a;
                    if obj <= best {
                        best = obj;
                        j = t;
                    }
                }
            }
        }
        gap = gmax - gmin;
        if i == usize::MAX || j == usize::MAX || gap < tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let kij = kernel(i, j);
        if y[i] != y[j] {
            let mut quad = diag[i] + diag[j] - 2.0 * kij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = diag[i] + diag[j] - 2.0 * kij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * kernel(i, t) * di + y[j] * kernel(j, t) * dj);
        }
    }

    SmoSolution {
        bias: -offset(&alpha, &grad, y, c),
        alpha,
        iterations,
        converged,
        kkt_gap: gap,
    }
}

/// `ρ` with `f(x) = Σ αᵢ yᵢ K − ρ`: averaged over free vectors, otherwise the
/// midpoint of the feasible interval.
fn offset(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum, mut free) = (0.0, 0usize);
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum += yg;
        }
    }
    if free > 0 {
        sum / free as f64
    } else {
        (ub + lb) / 2.0
    }
}

/// A trained two-class RBF machine. Positive decision values mean the
/// positive class.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvm {
    pub support_vectors: Vec<Vec<f64>>,
    /// `αᵢ yᵢ` for each support vector.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub c: f64,
    pub converged: bool,
    pub kkt_gap: f64,
}

fn check_params(c: f64, gamma: f64) -> Result<(), SvmError> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(SvmError::InvalidGamma(gamma));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(SvmError::InvalidC(c));
    }
    Ok(())
}

impl BinarySvm {
    /// Trains on `x` with `positive[i]` marking the positive class.
    pub fn train(x: &[Vec<f64>], positive: &[bool], c: f64, gamma: f64) -> Result<Self, SvmError> {
        check_params(c, gamma)?;
        let gram = rbf_gram(x, gamma);
        let idx: Vec<usize> = (0..x.len()).collect();
        Self::train_indexed(x, &idx, positive, &gram, x.len(), c, gamma)
    }

    /// Trains on rows `idx` of `x` using a precomputed Gram matrix over all of `x`.
    fn train_indexed(
        x: &[Vec<f64>],
        idx: &[usize],
        positive: &[bool],
        gram: &[f64],
        stride: usize,
        c: f64,
        gamma: f64,
    ) -> Result<Self, SvmError> {
        if positive.len() != idx.len() {
            return Err(SvmError::DimensionMismatch {
                expected: idx.len(),
                actual: positive.len(),
            });
        }
        if positive.iter().all(|&p| p) || positive.iter().all(|&p| !p) {
            return Err(SvmError::DegenerateLabels);
        }
        let y: Vec<f64> = positive.iter().map(|&p| if p { 1.0 } else { -1.0 }).collect();
        let max_iterations = (100 * idx.len()).max(100_000);
        let sol = solve_smo(
            |i, j| gram[idx[i] * stride + idx[j]],
            &y,
            c,
            DEFAULT_TOLERANCE,
            max_iterations,
        );
        if !sol.converged {
            warn!(
                "SMO stopped after {} iterations with KKT gap {:.3e}; using partial solution",
                sol.iterations, sol.kkt_gap
            );
        }
        let (mut support_vectors, mut dual_coef) = (Vec::new(), Vec::new());
        for (t, &a) in sol.alpha.iter().enumerate() {
            if a > 0.0 {
                support_vectors.push(x[idx[t]].clone());
                dual_coef.push(a * y[t]);
            }
        }
        Ok(Self {
            support_vectors,
            dual_coef,
            bias: sol.bias,
            gamma,
            c,
            converged: sol.converged,
            kkt_gap: sol.kkt_gap,
        })
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.dual_coef)
            .map(|(sv, a)| a * (-self.gamma * squared_distance(sv, x)).exp())
            .sum::<f64>()
            + self.bias
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.decision(x) > 0.0
    }

    /// Like [`BinarySvm::train`], but reports non-convergence as an error.
    pub fn train_strict(x: &[Vec<f64>], positive: &[bool], c: f64, gamma: f64) -> Result<Self, SvmError> {
        let model = Self::train(x, positive, c, gamma)?;
        if !model.converged {
            return Err(SvmError::NonConvergence {
                iterations: (100 * x.len()).max(100_000),
                gap: model.kkt_gap,
            });
        }
        Ok(model)
    }
}

/// One-vs-one ensemble over the classes present in the training labels.
#[derive(Debug, Clone, PartialEq)]
pub struct MulticlassSvm {
    pub classes: Vec<usize>,
    /// `(a, b, model)` with `a < b`; positive decisions vote for `a`.
    pub pairs: Vec<(usize, usize, BinarySvm)>,
}

impl MulticlassSvm {
    pub fn train(x: &[Vec<f64>], labels: &[usize], c: f64, gamma: f64) -> Result<Self, SvmError> {
        check_params(c, gamma)?;
        let gram = rbf_gram(x, gamma);
        Self::train_with_gram(x, labels, &gram, c, gamma)
    }

    /// Trains with a precomputed `n × n` RBF Gram matrix of `x` for this `gamma`.
    pub fn train_with_gram(x: &[Vec<f64>], labels: &[usize], gram: &[f64], c: f64, gamma: f64) -> Result<Self, SvmError> {
        check_params(c, gamma)?;
        if labels.len() != x.len() {
            return Err(SvmError::DimensionMismatch {
                expected: x.len(),
                actual: labels.len(),
            });
        }
        let mut classes: Vec<usize> = labels.to_vec();
        classes.sort_unstable();
        classes.dedup();
        if classes.len() < 2 {
            return Err(SvmError::DegenerateLabels);
        }
        let mut pairs = Vec::new();
        for (ai, &a) in classes.iter().enumerate() {
            for &b in &classes[ai + 1..] {
                let idx: Vec<usize> = (0..x.len()).filter(|&t| labels[t] == a || labels[t] == b).collect();
                let positive: Vec<bool> = idx.iter().map(|&t| labels[t] == a).collect();
                let model = BinarySvm::train_indexed(x, &idx, &positive, gram, x.len(), c, gamma)?;
                pairs.push((a, b, model));
            }
        }
        Ok(Self { classes, pairs })
    }

    /// Pairwise wins per class, in `classes` order.
    pub fn votes(&self, x: &[f64]) -> Vec<usize> {
        let mut votes = vec![0usize; self.classes.len()];
        for (a, b, model) in &self.pairs {
            let winner = if model.decision(x) >= 0.0 { a } else { b };
            let slot = self.classes.binary_search(winner).expect("pair class is known");
            votes[slot] += 1;
        }
        votes
    }

    /// Smallest pairwise decision value in favour of `class` over the pairs
    /// that involve it; positive when every such pair prefers `class`.
    pub fn margin(&self, x: &[f64], class: usize) -> f64 {
        self.pairs
            .iter()
            .filter_map(|(a, b, m)| {
                if *a == class {
                    Some(m.decision(x))
                } else if *b == class {
                    Some(-m.decision(x))
                } else {
                    None
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Majority vote over pairwise decisions; ties go to the smallest class id.
    pub fn predict(&self, x: &[f64]) -> usize {
        let best = self
            .votes(x)
            .iter()
            .enumerate()
            .max_by(|(i, a), (j, b)| a.cmp(b).then(j.cmp(i)))
            .map_or(0, |(i, _)| i);
        self.classes[best]
    }

    pub fn converged(&self) -> bool {
        self.pairs.iter().all(|(_, _, m)| m.converged)
    }
}
