mod common;

use std::path::PathBuf;

use common::*;
use geoscatter::dataset::{parse_tu_dataset, read_features, write_features, DatasetError, TuSources};
use geoscatter::signals::{clustering_coefficient, eccentricity, SignalError};
use geoscatter::{
    dataset_config, extract_features, load_features, load_tu_dataset, save_features, DatasetFamily, FeatureSchema,
    FeatureTable, Graph, MomentMode, SignalKind,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// All-pairs hop distances by Floyd–Warshall on the unweighted skeleton.
fn floyd_eccentricity(g: &Graph) -> Vec<f64> {
    let n = g.n();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0;
    }
    for (u, v, _) in g.edges() {
        d[u][v] = 1;
        d[v][u] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
            }
        }
    }
    d.iter().map(|row| *row.iter().max().unwrap() as f64).collect()
}

#[test]
fn triangle_with_pendant() {
    let g = Graph::from_unweighted(4, &[(0, 1), (1, 2), (0, 2), (0, 3)]).unwrap();
    let c = clustering_coefficient(&g);
    assert!((c[0] - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(&c[1..], &[1.0, 1.0, 0.0]);
}

#[test]
fn disconnected_eccentricity_rejected() {
    let g = Graph::from_unweighted(4, &[(0, 1), (2, 3)]).unwrap();
    assert!(matches!(eccentricity(&g), Err(SignalError::DisconnectedGraph { .. })));
}

#[test]
fn mutag_loads_with_expected_statistics() {
    let (d, report) = load_tu_dataset(&data_dir().join("MUTAG"), "MUTAG").unwrap();
    assert_eq!(d.len(), 188);
    assert_eq!(d.class_count(), 2);
    assert_eq!(d.label_values, vec![-1, 1]);
    assert_eq!(d.labels.iter().filter(|&&l| l == 1).count(), 125);
    assert_eq!(d.vertex_count(), 3371);
    assert_eq!(d.edge_count(), 3721);
    assert!((d.vertex_count() as f64 / 188.0 - 17.93).abs() < 0.01);
    assert_eq!(d.node_label_values, (0..7).collect::<Vec<_>>());
    assert_eq!(report.one_way_edges, 0);
    assert_eq!(report.self_loops, 0);
    assert!(d.graphs.iter().all(Graph::is_connected));

    let again = load_tu_dataset(&data_dir().join("MUTAG"), "MUTAG").unwrap().0;
    assert_eq!(d, again);
}

#[test]
fn mutag_label_rows_have_formula_width() {
    let (d, _) = load_tu_dataset(&data_dir().join("MUTAG"), "MUTAG").unwrap();
    let kinds = DatasetFamily::for_dataset("MUTAG").default_kinds(&d.node_data(0));
    assert_eq!(kinds, vec![SignalKind::NodeLabels]);
    let cfg = dataset_config(&d, &kinds, 5, 4, MomentMode::Normalized).unwrap();
    let table = extract_features(&d, &kinds, &cfg).unwrap();
    assert_eq!(table.rows.len(), 188);
    let mut csv = Vec::new();
    write_features(&mut csv, &table).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let data_line = text.lines().find(|l| !l.starts_with('#') && !l.starts_with("graph_id")).unwrap();
    assert_eq!(data_line.split(',').count(), 64 * 7 + 2);
}

#[test]
fn missing_directory_reports_path() {
    let dir = data_dir().join("NOPE");
    match load_tu_dataset(&dir, "NOPE") {
        Err(DatasetError::MissingFile(p)) => assert!(p.starts_with(&dir)),
        other => panic!("expected MissingFile, got {other:?}"),
    }
}

#[test]
fn edge_across_graphs_rejected() {
    let src = TuSources {
        adjacency: "1, 2\n2, 1\n",
        graph_indicator: "1\n2\n",
        graph_labels: "0\n1\n",
        node_labels: None,
        node_attributes: None,
    };
    assert!(matches!(
        parse_tu_dataset("X", src),
        Err(DatasetError::EdgeAcrossGraphs { .. })
    ));
}

#[test]
fn schema_mismatch_on_reload() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    let cfg = geoscatter::ScatteringConfig::new(5, 4, MomentMode::Normalized, vec!["x".into()]).unwrap();
    let table = FeatureTable {
        schema: FeatureSchema::from(&cfg),
        graph_ids: vec![0, 1],
        labels: vec![0, 1],
        rows: vec![vec![0.5; 64], vec![-1.25; 64]],
        metadata: None,
    };
    save_features(&path, &table).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 3);
    assert!(text.lines().all(|l| l.starts_with('#') || l.split(',').count() == 66));
    assert_eq!(load_features(&path, Some(&table.schema)).unwrap(), table);

    let other = FeatureSchema {
        scales: 4,
        ..table.schema.clone()
    };
    assert!(matches!(
        load_features(&path, Some(&other)),
        Err(DatasetError::SchemaMismatch { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clustering_is_a_fraction(n in 1usize..=25, seed in any::<u64>(), p in 0.0..1.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::from_unweighted(n, &edges).unwrap();
        prop_assert!(clustering_coefficient(&g).iter().all(|c| (0.0..=1.0).contains(c)));
    }

    #[test]
    fn vertex_signals_are_equivariant(n in 2usize..=25, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_connected_graph(&mut rng, n, 0.25, true);
        let perm = random_permutation(&mut rng, n);
        let gp = g.permuted(&perm).unwrap();
        let ecc = eccentricity(&g).unwrap();
        prop_assert_eq!(&ecc, &floyd_eccentricity(&g));
        prop_assert_eq!(eccentricity(&gp).unwrap(), permute(&ecc, &perm));
        prop_assert!(ecc.iter().all(|&e| e >= 1.0 && e.fract() == 0.0));
        prop_assert_eq!(clustering_coefficient(&gp), permute(&clustering_coefficient(&g), &perm));
    }

    #[test]
    fn feature_csv_round_trips_bitwise(
        rows in prop::collection::vec(prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 32), 0..6),
        meta in proptest::option::of("[ -~]{0,40}"),
    ) {
        let cfg = geoscatter::ScatteringConfig::new(2, 4, MomentMode::Unnormalized, vec!["a".into(), "b2".into()]).unwrap();
        let table = FeatureTable {
            schema: FeatureSchema::from(&cfg),
            graph_ids: (0..rows.len()).collect(),
            labels: (0..rows.len()).map(|i| i % 3).collect(),
            rows,
            metadata: meta,
        };
        let mut buf = Vec::new();
        write_features(&mut buf, &table).unwrap();
        let back = read_features(buf.as_slice()).unwrap();
        prop_assert_eq!(back.rows.len(), table.rows.len());
        for (a, b) in back.rows.iter().zip(&table.rows) {
            prop_assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
        prop_assert_eq!(back, table);
    }
}
