//! Geometric scattering moments of graph signals.
//!
//! For each signal `x` the feature block holds, in this fixed order:
//!
//! 1. zeroth order: moments of `x` itself, `q = 1..Q`;
//! 2. first order: moments of `|Ψ_j x|` for `j = 1..J` (outer), `q` inner;
//! 3. second order: moments of `|Ψ_{j'} |Ψ_j x||` for `j < j'` in
//!    lexicographic order (outer), `q` inner.
//!
//! Blocks for several signals are concatenated in the configured signal order.
//! This layout is a serialization contract shared with the feature cache.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::wavelets::wavelet_transform;

/// Variance below which skewness and kurtosis are reported as zero.
pub const ZERO_VARIANCE: f64 = 1e-24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScatteringError {
    #[error("cannot summarize an empty vector")]
    EmptyVector,
    #[error("signal `{0}` is missing")]
    MissingSignal(String),
    #[error("invalid scattering configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentMode {
    /// Power sums `Σ v^q`.
    Unnormalized,
    /// Mean, population variance, skewness, kurtosis (non-excess).
    Normalized,
}

impl fmt::Display for MomentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MomentMode::Unnormalized => "unnormalized",
            MomentMode::Normalized => "normalized",
        })
    }
}

impl FromStr for MomentMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unnormalized" | "unnorm" => Ok(MomentMode::Unnormalized),
            "normalized" | "norm" => Ok(MomentMode::Normalized),
            other => Err(format!("unknown moment mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScatteringConfig {
    pub scales: usize,
    pub moments: usize,
    pub mode: MomentMode,
    pub signal_names: Vec<String>,
}

impl Default for ScatteringConfig {
    fn default() -> Self {
        Self {
            scales: 5,
            moments: 4,
            mode: MomentMode::Normalized,
            signal_names: Vec::new(),
        }
    }
}

impl ScatteringConfig {
    pub fn new(scales: usize, moments: usize, mode: MomentMode, signal_names: Vec<String>) -> Result<Self, ScatteringError> {
        let cfg = Self {
            scales,
            moments,
            mode,
            signal_names,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ScatteringError> {
        if self.scales == 0 {
            return Err(ScatteringError::InvalidConfig("need at least one wavelet scale".into()));
        }
        // 2^J walk steps; anything past this is not a meaningful diffusion scale.
        if self.scales > 20 {
            return Err(ScatteringError::InvalidConfig(format!("{} scales is too many", self.scales)));
        }
        if self.moments == 0 {
            return Err(ScatteringError::InvalidConfig("need at least one moment".into()));
        }
        if self.mode == MomentMode::Normalized && self.moments > 4 {
            return Err(ScatteringError::InvalidConfig(
                "normalized moments are defined up to q = 4".into(),
            ));
        }
        Ok(())
    }

    /// Features per signal: `Q (1 + J + J(J−1)/2)`.
    pub fn features_per_signal(&self) -> usize {
        let j = self.scales;
        self.moments * (1 + j + j * (j - 1) / 2)
    }

    pub fn feature_count(&self) -> usize {
        self.features_per_signal() * self.signal_names.len()
    }

    /// The canonical layout, one record per feature.
    pub fn layout(&self) -> Vec<FeatureIndex> {
        let mut out = Vec::with_capacity(self.feature_count());
        for signal in 0..self.signal_names.len() {
            let mut push = |order| {
                for q in 1..=self.moments {
                    out.push(FeatureIndex { signal, order, q });
                }
            };
            push(Order::Zeroth);
            for j in 1..=self.scales {
                push(Order::First { j });
            }
            for j in 1..=self.scales {
                for j2 in j + 1..=self.scales {
                    push(Order::Second { j, j2 });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Order {
    Zeroth,
    First { j: usize },
    Second { j: usize, j2: usize },
}

/// Position of one feature in the layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureIndex {
    pub signal: usize,
    pub order: Order,
    pub q: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringFeatures {
    pub values: Vec<f64>,
    pub layout: Vec<FeatureIndex>,
}

/// The first `moments` summary statistics of `v`.
pub fn moment_summary(v: &[f64], moments: usize, mode: MomentMode) -> Result<Vec<f64>, ScatteringError> {
    if v.is_empty() {
        return Err(ScatteringError::EmptyVector);
    }
    Ok(match mode {
        MomentMode::Unnormalized => (1..=moments)
            .map(|q| v.iter().map(|x| x.powi(q as i32)).sum())
            .collect(),
        MomentMode::Normalized => normalized_moments(v).into_iter().take(moments).collect(),
    })
}

fn normalized_moments(v: &[f64]) -> [f64; 4] {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in v {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let var = m2 / n;
    if var < ZERO_VARIANCE {
        return [mean, var, 0.0, 0.0];
    }
    [mean, var, m3 / n / var.powf(1.5), m4 / n / (var * var)]
}

/// The feature block of a single signal.
pub fn scatter_signal(g: &Graph, x: &[f64], cfg: &ScatteringConfig) -> Result<Vec<f64>, ScatteringError> {
    cfg.validate()?;
    let (scales, q, mode) = (cfg.scales, cfg.moments, cfg.mode);
    let mut out = Vec::with_capacity(cfg.features_per_signal());
    out.extend(moment_summary(x, q, mode)?);

    let first = wavelet_transform(g, x, scales)?;
    let magnitudes: Vec<Vec<f64>> = first
        .coeffs
        .iter()
        .map(|c| c.iter().map(|v| v.abs()).collect())
        .collect();
    for m in &magnitudes {
        out.extend(moment_summary(m, q, mode)?);
    }
    // The last scale has no j' > j partner.
    for (j, m) in magnitudes.iter().enumerate().take(scales - 1) {
        let second = wavelet_transform(g, m, scales)?;
        for c in &second.coeffs[j + 1..] {
            let abs: Vec<f64> = c.iter().map(|v| v.abs()).collect();
            out.extend(moment_summary(&abs, q, mode)?);
        }
    }
    Ok(out)
}

/// A named signal on the vertices of one graph.
pub trait SignalSource {
    fn signal(&self, name: &str) -> Option<&[f64]>;
}

impl SignalSource for std::collections::BTreeMap<String, Vec<f64>> {
    fn signal(&self, name: &str) -> Option<&[f64]> {
        self.get(name).map(Vec::as_slice)
    }
}

impl SignalSource for [(String, Vec<f64>)] {
    fn signal(&self, name: &str) -> Option<&[f64]> {
        self.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }
}

impl SignalSource for Vec<(String, Vec<f64>)> {
    fn signal(&self, name: &str) -> Option<&[f64]> {
        self.as_slice().signal(name)
    }
}

/// Concatenated feature blocks for every configured signal of one graph.
pub fn scatter_graph<S: SignalSource + ?Sized>(
    g: &Graph,
    signals: &S,
    cfg: &ScatteringConfig,
) -> Result<ScatteringFeatures, ScatteringError> {
    cfg.validate()?;
    let mut values = Vec::with_capacity(cfg.feature_count());
    for name in &cfg.signal_names {
        let x = signals
            .signal(name)
            .ok_or_else(|| ScatteringError::MissingSignal(name.clone()))?;
        values.extend(scatter_signal(g, x, cfg)?);
    }
    Ok(ScatteringFeatures {
        values,
        layout: cfg.layout(),
    })
}
