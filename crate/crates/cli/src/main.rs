//! `geoscatter`: extract scattering features from graph benchmarks and run the
//! downstream classification and subspace analyses.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use geoscatter::signals::parse_signal_list;
use geoscatter::{HyperGrid, MomentMode, SignalKind, SplitProfile};

use config::RunConfig;

/// Parsed as one comma-separated value rather than repeated occurrences.
type SignalList = Vec<SignalKind>;

#[derive(Parser)]
#[command(name = "geoscatter", version, about = "Geometric scattering features for graph datasets")]
struct Cli {
    /// Directory holding one sub-directory per benchmark dataset.
    #[arg(long, global = true, env = "GS_DATA_DIR", default_value = "data")]
    data_dir: PathBuf,
    /// Directory receiving result tables and the feature cache.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct FeatureArgs {
    #[arg(long)]
    dataset: String,
    /// Comma-separated signals (ecc, clust, deg, attr, label). Defaults by dataset family.
    #[arg(long, value_parser = parse_signal_list)]
    signals: Option<SignalList>,
    /// Number of wavelet scales J.
    #[arg(long, default_value_t = 5)]
    scales: usize,
    /// Number of moments Q.
    #[arg(long, default_value_t = 4)]
    moments: usize,
    /// Moment mode: norm or unnorm.
    #[arg(long)]
    mode: Option<MomentMode>,
    /// Allow large-scale datasets (COLLAB, REDDIT).
    #[arg(long)]
    large: bool,
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Precomputed feature table; rejected unless its schema matches.
    #[arg(long)]
    features: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the feature table of a dataset.
    Extract {
        #[command(flatten)]
        feat: FeatureArgs,
    },
    /// Nested cross-validated SVM accuracy.
    Classify {
        #[command(flatten)]
        feat: FeatureArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Split profile (80-10-10, 70-10-20, 40-10-50, 20-10-70) or `all`.
        #[arg(long, value_delimiter = ',', default_value = "80-10-10")]
        split: Vec<String>,
    },
    /// Explained-variance dimensions and accuracy in the PCA space.
    Pca {
        #[command(flatten)]
        feat: FeatureArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.8,0.9,0.99")]
        threshold: Vec<f64>,
        #[arg(long, default_value = "80-10-10")]
        split: SplitProfile,
    },
    /// Class subspace distances, incoherence and preference matrices.
    Explore {
        #[command(flatten)]
        feat: FeatureArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0.9)]
        threshold: f64,
    },
    /// Wavelet coefficients of vertex impulses.
    Wavelets {
        /// Plain edge list, 0-indexed.
        #[arg(long, conflicts_with_all = ["dataset", "graph"])]
        edge_list: Option<PathBuf>,
        #[arg(long, requires = "graph")]
        dataset: Option<String>,
        /// Graph index within the dataset, 0-based.
        #[arg(long)]
        graph: Option<usize>,
        #[arg(long, default_value_t = 5)]
        scales: usize,
        /// Single impulse vertex; all vertices when omitted.
        #[arg(long)]
        center: Option<usize>,
        #[arg(long)]
        large: bool,
    },
}

fn parse_splits(values: &[String]) -> Result<Vec<SplitProfile>> {
    if values.iter().any(|v| v == "all") {
        return Ok(SplitProfile::ALL.to_vec());
    }
    values
        .iter()
        .map(|v| v.parse::<SplitProfile>().map_err(anyhow::Error::msg))
        .collect()
}

fn build_config(cli: Cli) -> Result<(RunConfig, fn(&RunConfig) -> Result<()>)> {
    let base = |command, feat: FeatureArgs, mode: MomentMode, model: Option<ModelArgs>| RunConfig {
        command,
        dataset: Some(feat.dataset),
        data_dir: cli.data_dir.clone(),
        signals: feat.signals,
        scales: feat.scales,
        moments: feat.moments,
        mode: feat.mode.unwrap_or(mode),
        seed: model.as_ref().map_or(0, |m| m.seed),
        out: cli.out.clone(),
        features: model.and_then(|m| m.features),
        splits: Vec::new(),
        thresholds: Vec::new(),
        grid: None,
        edge_list: None,
        graph: None,
        center: None,
        large: feat.large,
    };
    Ok(match cli.command {
        Command::Extract { ref feat } => (
            base("extract", feat.clone(), MomentMode::Normalized, None),
            commands::extract as fn(&RunConfig) -> Result<()>,
        ),
        Command::Classify { ref feat, ref model, ref split } => (
            RunConfig {
                splits: parse_splits(split)?,
                grid: Some(HyperGrid::default()),
                ..base("classify", feat.clone(), MomentMode::Normalized, Some(model.clone()))
            },
            commands::classify,
        ),
        Command::Pca { ref feat, ref model, ref threshold, split } => (
            RunConfig {
                splits: vec![split],
                thresholds: threshold.clone(),
                grid: Some(HyperGrid::default()),
                ..base("pca", feat.clone(), MomentMode::Unnormalized, Some(model.clone()))
            },
            commands::pca,
        ),
        Command::Explore { ref feat, ref model, threshold } => (
            RunConfig {
                thresholds: vec![threshold],
                ..base("explore", feat.clone(), MomentMode::Unnormalized, Some(model.clone()))
            },
            commands::explore,
        ),
        Command::Wavelets { ref edge_list, ref dataset, graph, scales, center, large } => (
            RunConfig {
                command: "wavelets",
                dataset: dataset.clone(),
                data_dir: cli.data_dir.clone(),
                signals: None,
                scales,
                moments: 1,
                mode: MomentMode::Unnormalized,
                seed: 0,
                out: cli.out.clone(),
                features: None,
                splits: Vec::new(),
                thresholds: Vec::new(),
                grid: None,
                edge_list: edge_list.clone(),
                graph,
                center,
                large,
            },
            commands::wavelets,
        ),
    })
}

fn run(cli: Cli) -> Result<()> {
    let (cfg, command) = build_config(cli)?;
    cfg.validate()?;
    command(&cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
