//! Whole-dataset feature extraction.

use rayon::prelude::*;
use thiserror::Error;

use crate::dataset::{FeatureSchema, FeatureTable, GraphDataset};
use crate::scattering::{scatter_graph, ScatteringConfig, ScatteringError};
use crate::signals::{compute_signals, signal_names, SignalKind};

#[derive(Debug, Error)]
#[error("dataset {dataset}, graph {graph}: {source}")]
pub struct ExtractionError {
    pub dataset: String,
    pub graph: usize,
    #[source]
    pub source: ScatteringError,
}

/// Scattering configuration whose signal list is what `kinds` produces on `dataset`.
pub fn dataset_config(
    dataset: &GraphDataset,
    kinds: &[SignalKind],
    scales: usize,
    moments: usize,
    mode: crate::scattering::MomentMode,
) -> Result<ScatteringConfig, ScatteringError> {
    let names = signal_names(kinds, &dataset.node_label_values, dataset.attribute_columns);
    ScatteringConfig::new(scales, moments, mode, names)
}

/// One feature row per graph, in dataset order. Graphs are processed in
/// parallel; the output order does not depend on scheduling.
pub fn extract_features(
    dataset: &GraphDataset,
    kinds: &[SignalKind],
    cfg: &ScatteringConfig,
) -> Result<FeatureTable, ExtractionError> {
    let rows = dataset
        .graphs
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let signals = compute_signals(g, kinds, &dataset.node_data(i));
            scatter_graph(g, &signals, cfg)
                .map(|f| f.values)
                .map_err(|source| ExtractionError {
                    dataset: dataset.name.clone(),
                    graph: i,
                    source,
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FeatureTable {
        schema: FeatureSchema::from(cfg),
        graph_ids: (0..dataset.len()).collect(),
        labels: dataset.labels.clone(),
        rows,
        metadata: None,
    })
}
