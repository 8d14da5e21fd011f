use std::path::PathBuf;

use anyhow::{bail, ensure, Result};
use geoscatter::{HyperGrid, MomentMode, SignalKind, SplitProfile};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Everything that determines a run's outputs. Validated before any data is
/// touched and copied verbatim into every output's metadata.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub dataset: Option<String>,
    pub data_dir: PathBuf,
    /// Requested signal kinds; `None` means the dataset family default.
    pub signals: Option<Vec<SignalKind>>,
    pub scales: usize,
    pub moments: usize,
    pub mode: MomentMode,
    pub seed: u64,
    pub out: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub features: Option<PathBuf>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub splits: Vec<SplitProfile>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub thresholds: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<HyperGrid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_list: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<usize>,
    pub large: bool,
}

/// Datasets whose graphs are large enough that runs need an explicit opt-in.
pub fn is_large_dataset(name: &str) -> bool {
    let upper = name.to_ascii_uppercase();
    upper.starts_with("COLLAB") || upper.starts_with("REDDIT")
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        ensure!(self.scales >= 1 && self.scales <= 20, "--scales must be in 1..=20, got {}", self.scales);
        ensure!(self.moments >= 1, "--moments must be at least 1");
        if self.mode == MomentMode::Normalized {
            ensure!(self.moments <= 4, "normalized moments are defined up to 4, got {}", self.moments);
        }
        for &t in &self.thresholds {
            ensure!(t > 0.0 && t <= 1.0, "--threshold must lie in (0, 1], got {t}");
        }
        if let Some(kinds) = &self.signals {
            ensure!(!kinds.is_empty(), "--signals is empty");
        }
        match (&self.dataset, &self.edge_list) {
            (None, None) => bail!("either --dataset or --edge-list is required"),
            (Some(_), Some(_)) => bail!("--dataset and --edge-list are mutually exclusive"),
            (Some(name), None) => {
                ensure!(
                    !name.is_empty() && !name.contains(['/', '\\']),
                    "--dataset must be a bare dataset name, got `{name}`"
                );
                if is_large_dataset(name) && !self.large {
                    bail!("{name} is a large-scale dataset; pass --large to run it");
                }
                if self.command == "wavelets" {
                    ensure!(self.graph.is_some(), "--graph is required with --dataset");
                }
            }
            (None, Some(_)) => ensure!(self.command == "wavelets", "--edge-list only applies to `wavelets`"),
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("run config serializes")
    }
}

/// Hex SHA-256 of a feature schema's canonical text form.
pub fn schema_hash(schema: &str) -> String {
    Sha256::digest(schema.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
