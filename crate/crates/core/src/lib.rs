//! Geometric scattering features for graph classification and embedding analysis.
//!
//! Graph signals are filtered by dyadic diffusion wavelets built from the lazy
//! random walk, passed through an absolute-value nonlinearity and summarized by
//! statistical moments over the vertices. The result does not depend on vertex
//! order and has a fixed length for every graph.

pub mod classification;
pub mod dataset;
pub mod embedding;
pub mod extract;
pub mod graph;
pub mod scattering;
pub mod signals;
pub mod svm;
pub mod wavelets;

pub use classification::{nested_cv, reduced_split_study, CvReport, SplitSummary, ExperimentProtocol, HyperGrid, SplitProfile};
pub use dataset::{load_features, load_tu_dataset, save_features, FeatureSchema, FeatureTable, GraphDataset};
pub use embedding::{ec_preference, pca_fit, ClassSubspace, PcaModel};
pub use extract::{dataset_config, extract_features};
pub use graph::{Graph, GraphError};
pub use scattering::{scatter_graph, scatter_signal, MomentMode, ScatteringConfig};
pub use signals::{DatasetFamily, SignalKind};
pub use wavelets::{wavelet_transform, WaveletCoefficients};
