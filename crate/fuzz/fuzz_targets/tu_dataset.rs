//! Benchmark-format ingestion must reject malformed input with an error,
//! never a panic. The input is split on NUL bytes into the individual files.

#![no_main]

use geoscatter::dataset::{parse_tu_dataset, TuSources};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let parts: Vec<&str> = s.split('\0').collect();
    let part = |i: usize| parts.get(i).copied();
    let src = TuSources {
        adjacency: part(0).unwrap_or(""),
        graph_indicator: part(1).unwrap_or(""),
        graph_labels: part(2).unwrap_or(""),
        node_labels: part(3),
        node_attributes: part(4),
    };
    if let Ok((ds, _)) = parse_tu_dataset("FUZZ", src) {
        assert_eq!(ds.graphs.len(), ds.labels.len());
        assert!(ds.labels.iter().all(|&l| l < ds.label_values.len()));
    }
});
