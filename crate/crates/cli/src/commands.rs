use std::fs;
use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};
use geoscatter::dataset::{read_features, write_features};
use geoscatter::embedding::{fit_class_subspaces, nearest_subspace_stats};
use geoscatter::{
    dataset_config, ec_preference, extract_features, load_features, load_tu_dataset, nested_cv, pca_fit,
    wavelet_transform, CvReport, DatasetFamily, ExperimentProtocol, FeatureSchema, FeatureTable, Graph,
    GraphDataset, SplitProfile,
};
use log::{info, warn};

use crate::config::{schema_hash, RunConfig};
use crate::output::{num, Outputs, Table};

fn load_dataset(cfg: &RunConfig) -> Result<GraphDataset> {
    let name = cfg.dataset.as_deref().context("--dataset is required")?;
    let (ds, report) = load_tu_dataset(&cfg.data_dir.join(name), name).with_context(|| format!("loading dataset {name}"))?;
    if report.one_way_edges > 0 {
        warn!("{name}: symmetrized {} edges listed in one direction only", report.one_way_edges);
    }
    if report.self_loops > 0 {
        warn!("{name}: dropped {} self-loops", report.self_loops);
    }
    info!(
        "{name}: {} graphs, {} classes, {} vertices, {} edges",
        ds.len(),
        ds.class_count(),
        ds.vertex_count(),
        ds.edge_count()
    );
    Ok(ds)
}

struct Features {
    dataset: GraphDataset,
    table: FeatureTable,
    schema: String,
    path: PathBuf,
}

fn feature_cache_path(cfg: &RunConfig, name: &str, schema: &str) -> PathBuf {
    cfg.out.join("features").join(format!("{name}-{}.csv", &schema_hash(schema)[..12]))
}

fn serialize_table(table: &FeatureTable) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    write_features(&mut bytes, table)?;
    Ok(bytes)
}

fn compute_features(cfg: &RunConfig, dataset: &GraphDataset, schema_cfg: &geoscatter::ScatteringConfig) -> Result<FeatureTable> {
    let kinds = signal_kinds(cfg, dataset);
    let mut table = extract_features(dataset, &kinds, schema_cfg)?;
    table.metadata = Some(cfg.to_json());
    Ok(table)
}

fn signal_kinds(cfg: &RunConfig, dataset: &GraphDataset) -> Vec<geoscatter::SignalKind> {
    cfg.signals.clone().unwrap_or_else(|| {
        let family = DatasetFamily::for_dataset(&dataset.name);
        if dataset.is_empty() {
            Vec::new()
        } else {
            family.default_kinds(&dataset.node_data(0))
        }
    })
}

/// Loads `--features`, reuses a cached table with the same schema, or extracts
/// and caches a fresh one.
fn obtain_features(cfg: &RunConfig) -> Result<Features> {
    let dataset = load_dataset(cfg)?;
    let kinds = signal_kinds(cfg, &dataset);
    let scfg = dataset_config(&dataset, &kinds, cfg.scales, cfg.moments, cfg.mode)?;
    let expected = FeatureSchema::from(&scfg);
    let schema = expected.to_string();
    let cache = feature_cache_path(cfg, &dataset.name, &schema);
    let (table, path) = if let Some(path) = &cfg.features {
        (load_features(path, Some(&expected)).with_context(|| format!("loading {}", path.display()))?, path.clone())
    } else if cache.exists() {
        info!("reusing cached features {}", cache.display());
        (load_features(&cache, Some(&expected)).with_context(|| format!("loading {}", cache.display()))?, cache)
    } else {
        let table = compute_features(cfg, &dataset, &scfg)?;
        let mut out = Outputs::new(cfg, Some(schema.clone()));
        out.add_bytes(&relative_to_out(cfg, &cache), serialize_table(&table)?);
        out.commit()?;
        (table, cache)
    };
    ensure!(
        table.labels == dataset.labels && table.rows.len() == dataset.len(),
        "feature table {} does not match dataset {} ({} rows, {} graphs)",
        path.display(),
        dataset.name,
        table.rows.len(),
        dataset.len()
    );
    Ok(Features { dataset, table, schema, path })
}

fn relative_to_out(cfg: &RunConfig, path: &std::path::Path) -> String {
    path.strip_prefix(&cfg.out).unwrap_or(path).to_string_lossy().into_owned()
}

pub fn extract(cfg: &RunConfig) -> Result<()> {
    let dataset = load_dataset(cfg)?;
    let kinds = signal_kinds(cfg, &dataset);
    let scfg = dataset_config(&dataset, &kinds, cfg.scales, cfg.moments, cfg.mode)?;
    let schema = FeatureSchema::from(&scfg).to_string();
    let table = compute_features(cfg, &dataset, &scfg)?;
    let path = feature_cache_path(cfg, &dataset.name, &schema);
    let bytes = serialize_table(&table)?;
    // Guards the round trip every downstream command depends on.
    ensure!(read_features(bytes.as_slice())?.rows == table.rows, "feature table does not round-trip");
    let mut out = Outputs::new(cfg, Some(schema));
    out.add_bytes(&relative_to_out(cfg, &path), bytes);
    out.commit()?;
    println!("{}", path.display());
    Ok(())
}

fn protocol(cfg: &RunConfig, split: SplitProfile, pca_threshold: Option<f64>) -> ExperimentProtocol {
    ExperimentProtocol {
        split,
        seed: cfg.seed,
        grid: cfg.grid.clone().unwrap_or_default(),
        standardize: true,
        pca_threshold,
    }
}

fn report_unconverged(report: &CvReport) {
    if report.unconverged_models > 0 {
        warn!(
            "{}: {} SVM models hit the iteration budget before converging",
            report.split, report.unconverged_models
        );
    }
}

pub fn classify(cfg: &RunConfig) -> Result<()> {
    let f = obtain_features(cfg)?;
    let name = &f.dataset.name;
    let mut rounds = Table::new(&["split", "round", "test_size", "accuracy"]);
    let mut selections = Table::new(&["split", "round", "model", "c", "gamma", "validation_accuracy"]);
    let mut summary = Table::new(&["split", "rounds", "mean", "std", "unconverged_models"]);
    for &split in &cfg.splits {
        let report = nested_cv(&f.table.rows, &f.table.labels, &protocol(cfg, split, None))?;
        report_unconverged(&report);
        for (r, round) in report.rounds.iter().enumerate() {
            rounds.push(vec![split.to_string(), r.to_string(), round.test_size.to_string(), num(round.accuracy)]);
            for (m, s) in round.selections.iter().enumerate() {
                selections.push(vec![
                    split.to_string(),
                    r.to_string(),
                    m.to_string(),
                    num(s.c),
                    num(s.gamma),
                    num(s.validation_accuracy),
                ]);
            }
        }
        summary.push(vec![
            split.to_string(),
            report.rounds.len().to_string(),
            num(report.mean),
            num(report.std),
            report.unconverged_models.to_string(),
        ]);
    }
    let mut out = Outputs::new(cfg, Some(f.schema));
    out.add_table(&format!("{name}_classify_rounds.csv"), &rounds);
    out.add_table(&format!("{name}_classify_selections.csv"), &selections);
    out.add_table(&format!("{name}_classify_summary.csv"), &summary);
    out.commit()?;
    info!("features from {}", f.path.display());
    print!("{}", summary.to_csv());
    Ok(())
}

pub fn pca(cfg: &RunConfig) -> Result<()> {
    let f = obtain_features(cfg)?;
    let name = &f.dataset.name;
    let rows = &f.table.rows;
    let labels = &f.table.labels;
    let model = pca_fit(rows)?;
    let split = cfg.splits[0];
    let mut table = Table::new(&["threshold", "dimension", "accuracy", "std"]);
    let mut classes = Table::new(&["threshold", "class", "label", "dimension"]);
    for &t in &cfg.thresholds {
        let report = nested_cv(rows, labels, &protocol(cfg, split, Some(t)))?;
        report_unconverged(&report);
        table.push(vec![
            num(t),
            model.threshold_dimension(t).to_string(),
            num(report.mean),
            num(report.std),
        ]);
        for s in fit_class_subspaces(rows, labels, t)? {
            classes.push(vec![
                num(t),
                s.class.to_string(),
                f.dataset.label_values[s.class].to_string(),
                s.dimension().to_string(),
            ]);
        }
    }
    let mut out = Outputs::new(cfg, Some(f.schema));
    out.add_table(&format!("{name}_pca.csv"), &table);
    out.add_table(&format!("{name}_pca_classes.csv"), &classes);
    out.commit()?;
    print!("{}", table.to_csv());
    Ok(())
}

fn class_matrix(values: &[Vec<f64>], label_values: &[i64]) -> Table {
    let header: Vec<String> = std::iter::once("class".to_string())
        .chain(label_values.iter().map(ToString::to_string))
        .collect();
    let mut t = Table::new(&header);
    for (row, l) in values.iter().zip(label_values) {
        t.push(std::iter::once(l.to_string()).chain(row.iter().map(|&v| num(v))).collect());
    }
    t
}

pub fn explore(cfg: &RunConfig) -> Result<()> {
    ensure!(cfg.thresholds.len() == 1, "`explore` takes a single --threshold");
    let threshold = cfg.thresholds[0];
    let f = obtain_features(cfg)?;
    let name = &f.dataset.name;
    let lv = &f.dataset.label_values;
    let stats = nearest_subspace_stats(&f.table.rows, &f.table.labels, threshold)?;
    let pref = ec_preference(&stats.distance_matrix, &stats.incoherence)?;

    let mut header = vec!["class".to_string(), "w".to_string()];
    header.extend((1..=lv.len()).map(|r| format!("rank{r}")));
    let mut w = Table::new(&header);
    for ((l, &wj), fractions) in lv.iter().zip(&stats.incoherence).zip(&stats.rank_fractions) {
        w.push(
            [l.to_string(), num(wj)]
                .into_iter()
                .chain(fractions.iter().map(|&v| num(v)))
                .collect(),
        );
    }
    let mut ranks = Table::new(&["graph_id", "class", "rank", "nearest"]);
    for (i, ((&label, &rank), &nearest)) in f.table.labels.iter().zip(&stats.ranks).zip(&stats.nearest).enumerate() {
        ranks.push(vec![
            f.table.graph_ids[i].to_string(),
            lv[label].to_string(),
            rank.to_string(),
            lv[nearest].to_string(),
        ]);
    }
    let d = class_matrix(&stats.distance_matrix, lv);
    let mut out = Outputs::new(cfg, Some(f.schema));
    out.add_table(&format!("{name}_explore_distances.csv"), &d);
    out.add_table(&format!("{name}_explore_incoherence.csv"), &w);
    out.add_table(&format!("{name}_explore_preference.csv"), &class_matrix(&pref.pref, lv));
    out.add_table(&format!("{name}_explore_ranks.csv"), &ranks);
    out.commit()?;
    print!("{}", d.to_csv());
    println!("true_nearest_fraction,{}", num(stats.true_nearest_fraction));
    Ok(())
}

pub fn wavelets(cfg: &RunConfig) -> Result<()> {
    let (graph, stem): (Graph, String) = if let Some(path) = &cfg.edge_list {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let g = geoscatter::dataset::parse_edge_list(&text, None).with_context(|| format!("parsing {}", path.display()))?;
        let stem = path.file_stem().map_or("graph".into(), |s| s.to_string_lossy().into_owned());
        (g, stem)
    } else {
        let ds = load_dataset(cfg)?;
        let idx = cfg.graph.context("--graph is required with --dataset")?;
        ensure!(idx < ds.len(), "graph {idx} out of range: {} has {} graphs", ds.name, ds.len());
        let stem = format!("{}-graph{idx}", ds.name);
        (ds.graphs[idx].clone(), stem)
    };
    let n = graph.n();
    let centers: Vec<usize> = match cfg.center {
        Some(c) if c >= n => bail!("center {c} out of range for a graph with {n} vertices"),
        Some(c) => vec![c],
        None => (0..n).collect(),
    };
    let mut table = Table::new(&["center", "vertex", "scale", "value"]);
    for &c in &centers {
        let mut delta = vec![0.0; n];
        delta[c] = 1.0;
        let coeffs = wavelet_transform(&graph, &delta, cfg.scales)?;
        for j in 1..=cfg.scales {
            for (v, &value) in coeffs.scale(j).iter().enumerate() {
                table.push(vec![c.to_string(), v.to_string(), j.to_string(), num(value)]);
            }
        }
    }
    let mut out = Outputs::new(cfg, None);
    let path = out.add_table(&format!("{stem}_wavelets.csv"), &table);
    out.commit()?;
    println!("{}", path.display());
    Ok(())
}
