//! Nested cross-validation with per-inner-model grid search and test-fold voting.
//!
//! The data are dealt into ten stratified base folds. A split profile decides,
//! for each evaluation round, which base folds form the test set and which are
//! used for training/validation. Inside a round every train/validation fold
//! serves once as the validation set: a model is grid-searched on the remaining
//! folds, and all those models vote on each test sample.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{pca_fit, EmbeddingError, PcaModel};
use crate::svm::{rbf_gram, MulticlassSvm, SvmError};

pub const BASE_FOLDS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassificationError {
    #[error("{0}")]
    FoldTooSmall(String),
    #[error("expected {expected} labels, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

/// Training/validation/test proportions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SplitProfile {
    /// Ten-fold: 8 folds train, 1 validation, 1 test.
    #[serde(rename = "80-10-10")]
    Split80,
    /// Five-fold over fold pairs: 7 train, 1 validation, 2 test.
    #[serde(rename = "70-10-20")]
    Split70,
    /// Two-fold over fold halves: 4 train, 1 validation, 5 test.
    #[serde(rename = "40-10-50")]
    Split40,
    /// Ten random draws of 3 train/validation folds from the pool; 7 test.
    #[serde(rename = "20-10-70")]
    Split20,
}

impl SplitProfile {
    pub const ALL: [SplitProfile; 4] = [
        SplitProfile::Split80,
        SplitProfile::Split70,
        SplitProfile::Split40,
        SplitProfile::Split20,
    ];

    /// `(train, validation, test)` in percent.
    pub fn percentages(self) -> (u32, u32, u32) {
        match self {
            SplitProfile::Split80 => (80, 10, 10),
            SplitProfile::Split70 => (70, 10, 20),
            SplitProfile::Split40 => (40, 10, 50),
            SplitProfile::Split20 => (20, 10, 70),
        }
    }

    /// Test and train/validation base-fold sets for every round.
    pub fn rounds(self, rng: &mut ChaCha8Rng) -> Vec<Round> {
        let all: Vec<usize> = (0..BASE_FOLDS).collect();
        let complement = |test: &[usize]| -> Vec<usize> { all.iter().copied().filter(|f| !test.contains(f)).collect() };
        let grouped = |size: usize| -> Vec<Round> {
            all.chunks(size)
                .map(|test| Round {
                    test: test.to_vec(),
                    train_val: complement(test),
                })
                .collect()
        };
        match self {
            SplitProfile::Split80 => grouped(1),
            SplitProfile::Split70 => grouped(2),
            SplitProfile::Split40 => grouped(5),
            SplitProfile::Split20 => (0..10)
                .map(|_| {
                    let mut pool = all.clone();
                    pool.shuffle(rng);
                    let mut train_val = pool[..3].to_vec();
                    train_val.sort_unstable();
                    let test = complement(&train_val);
                    Round { test, train_val }
                })
                .collect(),
        }
    }
}

impl fmt::Display for SplitProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b, c) = self.percentages();
        write!(f, "{a}-{b}-{c}")
    }
}

impl FromStr for SplitProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().map(|c| if c == '/' || c == '%' { '-' } else { c }).collect();
        let key = key.replace("--", "-");
        let key = key.trim_end_matches('-');
        SplitProfile::ALL
            .into_iter()
            .find(|p| p.to_string() == key)
            .ok_or_else(|| format!("unknown split `{s}` (expected one of 80-10-10, 70-10-20, 40-10-50, 20-10-70)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Round {
    pub test: Vec<usize>,
    pub train_val: Vec<usize>,
}

/// SVM hyperparameter grid. Effective `γ = factor / (p · σ²)` where `p` is the
/// feature count and `σ²` the variance of the preprocessed training matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperGrid {
    pub c_values: Vec<f64>,
    pub gamma_factors: Vec<f64>,
}

impl Default for HyperGrid {
    fn default() -> Self {
        Self {
            c_values: vec![1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3],
            gamma_factors: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentProtocol {
    pub split: SplitProfile,
    pub seed: u64,
    pub grid: HyperGrid,
    /// z-score features using training statistics.
    pub standardize: bool,
    /// Project onto training-fold PCA components reaching this explained variance.
    pub pca_threshold: Option<f64>,
}

impl Default for ExperimentProtocol {
    fn default() -> Self {
        Self {
            split: SplitProfile::Split80,
            seed: 0,
            grid: HyperGrid::default(),
            standardize: true,
            pca_threshold: None,
        }
    }
}

/// Independent random streams derived from one seed.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub enum Stream {
    Folds = 1,
    Rounds = 2,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Deals samples into `k` folds so that each class is spread evenly.
pub fn stratified_folds(labels: &[usize], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for class in 0..classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(rng);
        for i in members {
            folds[next % k].push(i);
            next += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

/// Per-feature z-scoring fit on training rows only.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[&[f64]]) -> Self {
        let dim = rows.first().map_or(0, |r| r.len());
        let m = rows.len().max(1) as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (a, v) in mean.iter_mut().zip(r.iter()) {
                *a += v;
            }
        }
        mean.iter_mut().for_each(|v| *v /= m);
        let mut var = vec![0.0; dim];
        for r in rows {
            for ((a, v), mu) in var.iter_mut().zip(r.iter()).zip(&mean) {
                *a += (v - mu) * (v - mu);
            }
        }
        let scale = var
            .into_iter()
            .map(|v| {
                let sd = (v / m).sqrt();
                if sd > 0.0 && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

/// Training-fold preprocessing: optional PCA projection, then optional z-scoring.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    pca: Option<(PcaModel, usize)>,
    standardizer: Option<Standardizer>,
}

impl Preprocessor {
    pub fn fit(rows: &[&[f64]], standardize: bool, pca_threshold: Option<f64>) -> Result<Self, ClassificationError> {
        let pca = match pca_threshold {
            Some(t) => {
                let owned: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
                let model = pca_fit(&owned)?;
                let k = model.threshold_dimension(t).max(1);
                Some((model, k))
            }
            None => None,
        };
        let mut this = Self { pca, standardizer: None };
        if standardize {
            let projected: Vec<Vec<f64>> = rows.iter().map(|r| this.project(r)).collect();
            let refs: Vec<&[f64]> = projected.iter().map(Vec::as_slice).collect();
            this.standardizer = Some(Standardizer::fit(&refs));
        }
        Ok(this)
    }

    fn project(&self, row: &[f64]) -> Vec<f64> {
        match &self.pca {
            Some((model, k)) => model.project(row, *k),
            None => row.to_vec(),
        }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        let projected = self.project(row);
        match &self.standardizer {
            Some(s) => s.transform(&projected),
            None => projected,
        }
    }

    pub fn output_dim(&self, input_dim: usize) -> usize {
        self.pca.as_ref().map_or(input_dim, |(_, k)| *k)
    }
}

/// Hyperparameters picked for one inner model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub c: f64,
    pub gamma: f64,
    pub validation_accuracy: f64,
    pub validation_hinge: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundResult {
    pub test_size: usize,
    pub accuracy: f64,
    pub selections: Vec<Selection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub split: SplitProfile,
    pub rounds: Vec<RoundResult>,
    /// Mean test accuracy over rounds, in [0, 1].
    pub mean: f64,
    /// Population standard deviation over rounds.
    pub std: f64,
    /// Binary sub-models that hit the SMO iteration cap.
    pub unconverged_models: usize,
}

impl CvReport {
    pub fn accuracies(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.accuracy).collect()
    }
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

struct InnerModel {
    model: MulticlassSvm,
    preprocessor: Preprocessor,
    selection: Selection,
}

fn gather<'a>(features: &'a [Vec<f64>], idx: &[usize]) -> Vec<&'a [f64]> {
    idx.iter().map(|&i| features[i].as_slice()).collect()
}

/// Grid-searches one model on `train`, scored by accuracy on `validation`.
/// Equal accuracies are separated by the lower mean hinge loss of the
/// pairwise margins; remaining ties keep the first grid point in `(C, γ)` order.
fn fit_inner(
    features: &[Vec<f64>],
    labels: &[usize],
    train: &[usize],
    validation: &[usize],
    protocol: &ExperimentProtocol,
) -> Result<InnerModel, ClassificationError> {
    let preprocessor = Preprocessor::fit(&gather(features, train), protocol.standardize, protocol.pca_threshold)?;
    let x: Vec<Vec<f64>> = train.iter().map(|&i| preprocessor.transform(&features[i])).collect();
    let y: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
    let xv: Vec<Vec<f64>> = validation.iter().map(|&i| preprocessor.transform(&features[i])).collect();
    let yv: Vec<usize> = validation.iter().map(|&i| labels[i]).collect();

    let p = x.first().map_or(1, Vec::len).max(1) as f64;
    let count = (x.len() * x.first().map_or(0, Vec::len)).max(1) as f64;
    let mean = x.iter().flatten().sum::<f64>() / count;
    let var = x.iter().flatten().map(|v| (v - mean) * (v - mean)).sum::<f64>() / count;
    let var = if var > 0.0 && var.is_finite() { var } else { 1.0 };

    let mut best: Option<(MulticlassSvm, Selection)> = None;
    let mut gammas: Vec<(usize, f64)> = protocol
        .grid
        .gamma_factors
        .iter()
        .enumerate()
        .map(|(k, f)| (k, f / (p * var)))
        .collect();
    gammas.sort_by_key(|&(k, _)| k);
    let grams: Vec<Vec<f64>> = gammas.iter().map(|&(_, g)| rbf_gram(&x, g)).collect();
    for &c in &protocol.grid.c_values {
        for ((_, gamma), gram) in gammas.iter().zip(&grams) {
            let model = MulticlassSvm::train_with_gram(&x, &y, gram, c, *gamma)?;
            let correct = xv.iter().zip(&yv).filter(|(xi, &yi)| model.predict(xi) == yi).count();
            let scale = yv.len().max(1) as f64;
            let accuracy = correct as f64 / scale;
            let hinge = xv
                .iter()
                .zip(&yv)
                .map(|(xi, &yi)| (1.0 - model.margin(xi, yi)).max(0.0))
                .sum::<f64>()
                / scale;
            let better = best.as_ref().map_or(true, |(_, s)| {
                accuracy > s.validation_accuracy || (accuracy == s.validation_accuracy && hinge < s.validation_hinge)
            });
            if better {
                best = Some((
                    model,
                    Selection {
                        c,
                        gamma: *gamma,
                        validation_accuracy: accuracy,
                        validation_hinge: hinge,
                    },
                ));
            }
        }
    }
    let (model, selection) = best.ok_or_else(|| ClassificationError::FoldTooSmall("empty hyperparameter grid".into()))?;
    Ok(InnerModel {
        model,
        preprocessor,
        selection,
    })
}

/// Majority vote; ties go to the smallest class id.
fn vote(predictions: impl Iterator<Item = usize>, classes: usize) -> usize {
    let mut votes = vec![0usize; classes];
    for p in predictions {
        votes[p] += 1;
    }
    votes
        .iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| a.cmp(b).then(j.cmp(i)))
        .map_or(0, |(i, _)| i)
}

/// Runs the nested, voting cross-validation described by `protocol`.
pub fn nested_cv(
    features: &[Vec<f64>],
    labels: &[usize],
    protocol: &ExperimentProtocol,
) -> Result<CvReport, ClassificationError> {
    if features.len() != labels.len() {
        return Err(ClassificationError::DimensionMismatch {
            expected: features.len(),
            actual: labels.len(),
        });
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let folds = stratified_folds(labels, BASE_FOLDS, &mut stream_rng(protocol.seed, Stream::Folds));
    if let Some(k) = folds.iter().position(Vec::is_empty) {
        return Err(ClassificationError::FoldTooSmall(format!(
            "base fold {k} is empty ({} samples for {BASE_FOLDS} folds)",
            labels.len()
        )));
    }
    let rounds = protocol.split.rounds(&mut stream_rng(protocol.seed, Stream::Rounds));

    let jobs: Vec<(usize, usize)> = rounds
        .iter()
        .enumerate()
        .flat_map(|(r, round)| round.train_val.iter().map(move |&v| (r, v)))
        .collect();
    let inner: Vec<InnerModel> = jobs
        .par_iter()
        .map(|&(r, v)| {
            let round = &rounds[r];
            let train: Vec<usize> = round
                .train_val
                .iter()
                .filter(|&&f| f != v)
                .flat_map(|&f| folds[f].iter().copied())
                .collect();
            let mut train_classes: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
            train_classes.sort_unstable();
            train_classes.dedup();
            if train_classes.len() < 2 {
                return Err(ClassificationError::FoldTooSmall(format!(
                    "round {r}: training folds without fold {v} contain fewer than two classes"
                )));
            }
            fit_inner(features, labels, &train, &folds[v], protocol)
        })
        .collect::<Result<_, _>>()?;

    let mut results = Vec::with_capacity(rounds.len());
    let mut offset = 0;
    for round in &rounds {
        let models = &inner[offset..offset + round.train_val.len()];
        offset += round.train_val.len();
        let test: Vec<usize> = round.test.iter().flat_map(|&f| folds[f].iter().copied()).collect();
        let correct = test
            .iter()
            .filter(|&&i| {
                let predicted = vote(
                    models
                        .iter()
                        .map(|m| m.model.predict(&m.preprocessor.transform(&features[i]))),
                    classes,
                );
                predicted == labels[i]
            })
            .count();
        results.push(RoundResult {
            test_size: test.len(),
            accuracy: correct as f64 / test.len() as f64,
            selections: models.iter().map(|m| m.selection).collect(),
        });
    }
    let unconverged_models = inner
        .iter()
        .map(|m| m.model.pairs.iter().filter(|(_, _, b)| !b.converged).count())
        .sum();
    let (mean, std) = mean_std(&results.iter().map(|r| r.accuracy).collect::<Vec<_>>());
    Ok(CvReport {
        split: protocol.split,
        rounds: results,
        mean,
        std,
        unconverged_models,
    })
}

/// Accuracy under one split profile, pooled over several seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub split: SplitProfile,
    pub reports: Vec<CvReport>,
    /// Mean over every round of every seed.
    pub mean: f64,
    pub std: f64,
}

/// Accuracy under every split profile, all else equal, for each seed.
pub fn reduced_split_study(
    features: &[Vec<f64>],
    labels: &[usize],
    protocol: &ExperimentProtocol,
    seeds: &[u64],
) -> Result<Vec<SplitSummary>, ClassificationError> {
    SplitProfile::ALL
        .iter()
        .map(|&split| {
            let reports = seeds
                .iter()
                .map(|&seed| {
                    let p = ExperimentProtocol {
                        split,
                        seed,
                        ..protocol.clone()
                    };
                    nested_cv(features, labels, &p)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let pooled: Vec<f64> = reports.iter().flat_map(CvReport::accuracies).collect();
            let (mean, std) = mean_std(&pooled);
            Ok(SplitSummary {
                split,
                reports,
                mean,
                std,
            })
        })
        .collect()
}
