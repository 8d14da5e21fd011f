//! Graph-classification benchmark ingestion and the feature-cache CSV.
//!
//! Benchmark datasets use the common multi-file text layout: `<NAME>_A.txt`
//! holds 1-indexed `row, col` vertex pairs, `<NAME>_graph_indicator.txt` maps
//! each vertex to a 1-indexed graph, `<NAME>_graph_labels.txt` has one class
//! label per graph, and the optional `<NAME>_node_labels.txt` and
//! `<NAME>_node_attributes.txt` carry per-vertex data.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::scattering::{MomentMode, ScatteringConfig};
use crate::signals::NodeData;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{file}:{line}: {reason}")]
    MalformedLine { file: String, line: usize, reason: String },
    #[error("{file}:{line}: edge ({u}, {v}) joins graph {gu} and graph {gv}")]
    EdgeAcrossGraphs {
        file: String,
        line: usize,
        u: usize,
        v: usize,
        gu: usize,
        gv: usize,
    },
    #[error("{file}:{line}: vertex {index} is not listed in the graph indicator ({vertices} vertices)")]
    OrphanVertexIndex {
        file: String,
        line: usize,
        index: usize,
        vertices: usize,
    },
    #[error("{file}: expected {expected} lines, found {actual}")]
    LineCountMismatch {
        file: String,
        expected: usize,
        actual: usize,
    },
    #[error("graph {0} has no vertices")]
    EmptyGraph(usize),
    #[error("feature schema mismatch: expected {expected}, found {found}")]
    SchemaMismatch { expected: String, found: String },
    #[error("invalid signal name `{0}`")]
    InvalidSignalName(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A labelled collection of graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphDataset {
    pub name: String,
    pub graphs: Vec<Graph>,
    /// Class ids, contiguous from 0.
    pub labels: Vec<usize>,
    /// Original label value of each class id.
    pub label_values: Vec<i64>,
    pub node_labels: Option<Vec<Vec<i64>>>,
    /// Every node label value in the dataset, ascending.
    pub node_label_values: Vec<i64>,
    pub node_attributes: Option<Vec<Vec<Vec<f64>>>>,
    pub attribute_columns: usize,
}

impl GraphDataset {
    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.label_values.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.graphs.iter().map(Graph::n).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.graphs.iter().map(Graph::edge_count).sum()
    }

    pub fn node_data(&self, graph: usize) -> NodeData<'_> {
        NodeData {
            attributes: self.node_attributes.as_ref().map(|a| a[graph].as_slice()),
            labels: self.node_labels.as_ref().map(|l| l[graph].as_slice()),
            label_values: &self.node_label_values,
            attribute_columns: self.attribute_columns,
        }
    }
}

/// Irregularities tolerated during ingestion.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestReport {
    /// Edges listed in only one direction (symmetrized).
    pub one_way_edges: usize,
    /// Self-loops dropped.
    pub self_loops: usize,
}

/// The text of each benchmark file, already read into memory.
#[derive(Debug, Clone, Copy)]
pub struct TuSources<'a> {
    pub adjacency: &'a str,
    pub graph_indicator: &'a str,
    pub graph_labels: &'a str,
    pub node_labels: Option<&'a str>,
    pub node_attributes: Option<&'a str>,
}

fn file_name(name: &str, suffix: &str) -> String {
    format!("{name}_{suffix}.txt")
}

/// Reads `<name>_*.txt` from `dir`.
pub fn load_tu_dataset(dir: &Path, name: &str) -> Result<(GraphDataset, IngestReport), DatasetError> {
    let read = |suffix: &str| -> Result<String, DatasetError> {
        let path = dir.join(file_name(name, suffix));
        fs::read_to_string(&path).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => DatasetError::MissingFile(path),
            _ => DatasetError::Io(e),
        })
    };
    let optional = |suffix: &str| -> Result<Option<String>, DatasetError> {
        match read(suffix) {
            Ok(s) => Ok(Some(s)),
            Err(DatasetError::MissingFile(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let adjacency = read("A")?;
    let graph_indicator = read("graph_indicator")?;
    let graph_labels = read("graph_labels")?;
    let node_labels = optional("node_labels")?;
    let node_attributes = optional("node_attributes")?;
    parse_tu_dataset(
        name,
        TuSources {
            adjacency: &adjacency,
            graph_indicator: &graph_indicator,
            graph_labels: &graph_labels,
            node_labels: node_labels.as_deref(),
            node_attributes: node_attributes.as_deref(),
        },
    )
}

/// Non-empty lines with their 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_field<T: std::str::FromStr>(file: &str, line: usize, field: &str) -> Result<T, DatasetError> {
    field.trim().parse().map_err(|_| DatasetError::MalformedLine {
        file: file.to_string(),
        line,
        reason: format!("cannot parse `{}`", field.trim()),
    })
}

fn parse_column<T: std::str::FromStr>(file: &str, text: &str) -> Result<Vec<T>, DatasetError> {
    lines(text).map(|(no, l)| parse_field(file, no, l)).collect()
}

/// Parses a dataset from in-memory file contents.
pub fn parse_tu_dataset(name: &str, src: TuSources<'_>) -> Result<(GraphDataset, IngestReport), DatasetError> {
    let indicator_file = file_name(name, "graph_indicator");
    let labels_file = file_name(name, "graph_labels");
    let adjacency_file = file_name(name, "A");

    let raw_labels: Vec<i64> = parse_column(&labels_file, src.graph_labels)?;
    let graph_count = raw_labels.len();

    let mut graph_of = Vec::new();
    for (no, l) in lines(src.graph_indicator) {
        let g: usize = parse_field(&indicator_file, no, l)?;
        if g == 0 || g > graph_count {
            return Err(DatasetError::MalformedLine {
                file: indicator_file,
                line: no,
                reason: format!("graph id {g} outside 1..={graph_count}"),
            });
        }
        graph_of.push(g - 1);
    }
    let vertex_total = graph_of.len();

    let mut local = Vec::with_capacity(vertex_total);
    let mut sizes = vec![0usize; graph_count];
    for &g in &graph_of {
        local.push(sizes[g]);
        sizes[g] += 1;
    }
    if let Some(empty) = sizes.iter().position(|&s| s == 0) {
        return Err(DatasetError::EmptyGraph(empty));
    }

    let mut report = IngestReport::default();
    // per graph: undirected pair -> directions seen (bit 0: u<v listed, bit 1: v<u listed)
    let mut pairs: Vec<HashMap<(usize, usize), u8>> = vec![HashMap::new(); graph_count];
    for (no, l) in lines(src.adjacency) {
        let mut fields = l.split(',');
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(DatasetError::MalformedLine {
                file: adjacency_file,
                line: no,
                reason: "expected two comma-separated vertex ids".into(),
            });
        };
        let u: usize = parse_field(&adjacency_file, no, a)?;
        let v: usize = parse_field(&adjacency_file, no, b)?;
        for index in [u, v] {
            if index == 0 || index > vertex_total {
                return Err(DatasetError::OrphanVertexIndex {
                    file: adjacency_file,
                    line: no,
                    index,
                    vertices: vertex_total,
                });
            }
        }
        let (gu, gv) = (graph_of[u - 1], graph_of[v - 1]);
        if gu != gv {
            return Err(DatasetError::EdgeAcrossGraphs {
                file: adjacency_file,
                line: no,
                u,
                v,
                gu: gu + 1,
                gv: gv + 1,
            });
        }
        if u == v {
            report.self_loops += 1;
            continue;
        }
        let (lu, lv) = (local[u - 1], local[v - 1]);
        let key = (lu.min(lv), lu.max(lv));
        *pairs[gu].entry(key).or_insert(0) |= if lu < lv { 1 } else { 2 };
    }

    let mut graphs = Vec::with_capacity(graph_count);
    for (g, seen) in pairs.into_iter().enumerate() {
        let mut edges: Vec<(usize, usize)> = seen.keys().copied().collect();
        edges.sort_unstable();
        report.one_way_edges += seen.values().filter(|&&bits| bits != 3).count();
        let graph = Graph::from_unweighted(sizes[g], &edges)
            .expect("deduplicated in-range edges without self-loops");
        graphs.push(graph);
    }
    if report.one_way_edges > 0 {
        warn!("{name}: {} edges listed in one direction only", report.one_way_edges);
    }
    if report.self_loops > 0 {
        warn!("{name}: dropped {} self-loops", report.self_loops);
    }

    let label_values: Vec<i64> = raw_labels.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let labels = raw_labels
        .iter()
        .map(|l| label_values.binary_search(l).expect("label drawn from set"))
        .collect();

    let split_by_graph = |file: &str, count: usize| -> Result<(), DatasetError> {
        if count != vertex_total {
            return Err(DatasetError::LineCountMismatch {
                file: file.to_string(),
                expected: vertex_total,
                actual: count,
            });
        }
        Ok(())
    };

    let (node_labels, node_label_values) = match src.node_labels {
        Some(text) => {
            let file = file_name(name, "node_labels");
            // multi-column node label files keep the first column
            let values: Vec<i64> = lines(text)
                .map(|(no, l)| parse_field(&file, no, l.split(',').next().unwrap_or("")))
                .collect::<Result<_, _>>()?;
            split_by_graph(&file, values.len())?;
            let mut per_graph: Vec<Vec<i64>> = sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
            for (v, value) in values.iter().enumerate() {
                per_graph[graph_of[v]].push(*value);
            }
            let distinct = values.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
            (Some(per_graph), distinct)
        }
        None => (None, Vec::new()),
    };

    let (node_attributes, attribute_columns) = match src.node_attributes {
        Some(text) => {
            let file = file_name(name, "node_attributes");
            let mut rows = Vec::with_capacity(vertex_total);
            let mut columns = None;
            for (no, l) in lines(text) {
                let row: Vec<f64> = l
                    .split(',')
                    .map(|f| parse_field(&file, no, f))
                    .collect::<Result<_, _>>()?;
                if row.iter().any(|x| !x.is_finite()) {
                    return Err(DatasetError::MalformedLine {
                        file,
                        line: no,
                        reason: "non-finite attribute".into(),
                    });
                }
                match columns {
                    None => columns = Some(row.len()),
                    Some(c) if c != row.len() => {
                        return Err(DatasetError::MalformedLine {
                            file,
                            line: no,
                            reason: format!("expected {c} attributes, found {}", row.len()),
                        })
                    }
                    _ => {}
                }
                rows.push(row);
            }
            split_by_graph(&file, rows.len())?;
            let mut per_graph: Vec<Vec<Vec<f64>>> = sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
            for (v, row) in rows.into_iter().enumerate() {
                per_graph[graph_of[v]].push(row);
            }
            (Some(per_graph), columns.unwrap_or(0))
        }
        None => (None, 0),
    };

    Ok((
        GraphDataset {
            name: name.to_string(),
            graphs,
            labels,
            label_values,
            node_labels,
            node_label_values,
            node_attributes,
            attribute_columns,
        },
        report,
    ))
}

/// Identifies which scattering configuration produced a feature table.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub scales: usize,
    pub moments: usize,
    pub mode: MomentMode,
    pub signals: Vec<String>,
}

impl FeatureSchema {
    pub fn feature_count(&self) -> usize {
        self.config().feature_count()
    }

    pub fn config(&self) -> ScatteringConfig {
        ScatteringConfig {
            scales: self.scales,
            moments: self.moments,
            mode: self.mode,
            signal_names: self.signals.clone(),
        }
    }
}

impl From<&ScatteringConfig> for FeatureSchema {
    fn from(cfg: &ScatteringConfig) -> Self {
        Self {
            scales: cfg.scales,
            moments: cfg.moments,
            mode: cfg.mode,
            signals: cfg.signal_names.clone(),
        }
    }
}

impl fmt::Display for FeatureSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "scales={} moments={} mode={} signals={}",
            self.scales,
            self.moments,
            self.mode,
            self.signals.join(";")
        )
    }
}

/// Extracted features for a dataset: one row per graph.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub schema: FeatureSchema,
    pub graph_ids: Vec<usize>,
    pub labels: Vec<usize>,
    pub rows: Vec<Vec<f64>>,
    /// Free-form single-line metadata (run configuration), if any.
    pub metadata: Option<String>,
}

const MAGIC: &str = "# geoscatter features v1";

fn valid_signal_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "_-.:".contains(c))
}

pub fn write_features<W: Write>(mut w: W, table: &FeatureTable) -> Result<(), DatasetError> {
    if let Some(bad) = table.schema.signals.iter().find(|s| !valid_signal_name(s)) {
        return Err(DatasetError::InvalidSignalName(bad.clone()));
    }
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "# schema: {}", table.schema)?;
    if let Some(meta) = &table.metadata {
        writeln!(w, "# config: {}", meta.replace(['\n', '\r'], " "))?;
    }
    write!(w, "graph_id,label")?;
    for i in 0..table.schema.feature_count() {
        write!(w, ",f{i}")?;
    }
    writeln!(w)?;
    for ((id, label), row) in table.graph_ids.iter().zip(&table.labels).zip(&table.rows) {
        write!(w, "{id},{label}")?;
        for x in row {
            // 17 significant digits round-trip every finite double
            write!(w, ",{x:.16e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn parse_schema(line: usize, body: &str) -> Result<FeatureSchema, DatasetError> {
    let bad = |reason: String| DatasetError::MalformedLine {
        file: "features".into(),
        line,
        reason,
    };
    let (mut scales, mut moments, mut mode, mut signals) = (None, None, None, None);
    for token in body.split_whitespace() {
        let (key, value) = token.split_once('=').ok_or_else(|| bad(format!("bad schema token `{token}`")))?;
        match key {
            "scales" => scales = Some(value.parse().map_err(|_| bad(format!("bad scales `{value}`")))?),
            "moments" => moments = Some(value.parse().map_err(|_| bad(format!("bad moments `{value}`")))?),
            "mode" => mode = Some(value.parse::<MomentMode>().map_err(bad)?),
            "signals" => {
                signals = Some(if value.is_empty() {
                    Vec::new()
                } else {
                    value.split(';').map(str::to_string).collect()
                })
            }
            other => return Err(bad(format!("unknown schema key `{other}`"))),
        }
    }
    let schema = FeatureSchema {
        scales: scales.ok_or_else(|| bad("schema lacks scales".into()))?,
        moments: moments.ok_or_else(|| bad("schema lacks moments".into()))?,
        mode: mode.ok_or_else(|| bad("schema lacks mode".into()))?,
        signals: signals.ok_or_else(|| bad("schema lacks signals".into()))?,
    };
    if let Some(name) = schema.signals.iter().find(|s| !valid_signal_name(s)) {
        return Err(bad(format!("invalid signal name `{name}`")));
    }
    schema
        .config()
        .validate()
        .map_err(|e| bad(e.to_string()))?;
    if schema.signals.len() > 1 << 16 {
        return Err(bad("too many signals".into()));
    }
    Ok(schema)
}

pub fn read_features<R: BufRead>(r: R) -> Result<FeatureTable, DatasetError> {
    let bad = |line: usize, reason: &str| DatasetError::MalformedLine {
        file: "features".into(),
        line,
        reason: reason.to_string(),
    };
    let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = || -> Result<Option<(usize, String)>, DatasetError> {
        match lines.next() {
            Some((no, l)) => Ok(Some((no, l?))),
            None => Ok(None),
        }
    };

    match next()? {
        Some((_, l)) if l.trim_end() == MAGIC => {}
        Some((no, _)) => return Err(bad(no, "not a feature file")),
        None => return Err(bad(1, "empty file")),
    }
    let schema = match next()? {
        Some((no, l)) => match l.strip_prefix("# schema: ") {
            Some(body) => parse_schema(no, body)?,
            None => return Err(bad(no, "missing schema line")),
        },
        None => return Err(bad(2, "missing schema line")),
    };
    let width = schema.feature_count();

    let mut metadata = None;
    let header = loop {
        match next()? {
            Some((_, l)) if l.starts_with("# config: ") => {
                metadata = Some(l["# config: ".len()..].to_string());
            }
            Some((_, l)) if l.starts_with('#') => {}
            Some(h) => break h,
            None => return Err(bad(0, "missing header row")),
        }
    };
    let (no, header) = header;
    let expected_header = std::iter::once("graph_id".to_string())
        .chain(std::iter::once("label".to_string()))
        .chain((0..width).map(|i| format!("f{i}")));
    if !header.trim_end().split(',').map(str::to_string).eq(expected_header) {
        return Err(bad(no, "header does not match schema"));
    }

    let (mut graph_ids, mut labels, mut rows) = (Vec::new(), Vec::new(), Vec::new());
    while let Some((no, l)) = next()? {
        let l = l.trim_end();
        if l.is_empty() {
            continue;
        }
        let mut fields = l.split(',');
        let id: usize = parse_field("features", no, fields.next().unwrap_or(""))?;
        let label: usize = parse_field("features", no, fields.next().ok_or_else(|| bad(no, "missing label"))?)?;
        let row: Vec<f64> = fields.map(|f| parse_field("features", no, f)).collect::<Result<_, _>>()?;
        if row.len() != width {
            return Err(bad(no, &format!("expected {width} features, found {}", row.len())));
        }
        graph_ids.push(id);
        labels.push(label);
        rows.push(row);
    }
    Ok(FeatureTable {
        schema,
        graph_ids,
        labels,
        rows,
        metadata,
    })
}

pub fn save_features(path: &Path, table: &FeatureTable) -> Result<(), DatasetError> {
    let file = fs::File::create(path)?;
    let mut w = io::BufWriter::new(file);
    write_features(&mut w, table)?;
    w.flush()?;
    Ok(())
}

/// Loads a feature table, rejecting it unless its schema equals `expected`.
pub fn load_features(path: &Path, expected: Option<&FeatureSchema>) -> Result<FeatureTable, DatasetError> {
    let file = fs::File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => DatasetError::MissingFile(path.to_path_buf()),
        _ => DatasetError::Io(e),
    })?;
    let table = read_features(io::BufReader::new(file))?;
    if let Some(expected) = expected {
        if &table.schema != expected {
            return Err(DatasetError::SchemaMismatch {
                expected: expected.to_string(),
                found: table.schema.to_string(),
            });
        }
    }
    Ok(table)
}

/// Parses a plain edge list: one `u v [w]` or `u,v[,w]` per line, 0-indexed,
/// `#` comments allowed. The vertex count is one past the largest index
/// unless a larger `n` is given.
pub fn parse_edge_list(text: &str, n: Option<usize>) -> Result<Graph, DatasetError> {
    let file = "edge list";
    let mut edges = Vec::new();
    let mut max_index = None;
    for (no, l) in lines(text) {
        let l = l.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        let fields: Vec<&str> = l.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()).collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(DatasetError::MalformedLine {
                file: file.into(),
                line: no,
                reason: "expected `u v [weight]`".into(),
            });
        }
        let u: usize = parse_field(file, no, fields[0])?;
        let v: usize = parse_field(file, no, fields[1])?;
        let w: f64 = match fields.get(2) {
            Some(f) => parse_field(file, no, f)?,
            None => 1.0,
        };
        max_index = max_index.max(Some(u.max(v)));
        edges.push((u, v, w, no));
    }
    let inferred = max_index.map_or(0, |m| m + 1);
    let n = n.unwrap_or(inferred).max(inferred);
    let triples: Vec<_> = edges.iter().map(|&(u, v, w, _)| (u, v, w)).collect();
    if n > 1 << 26 {
        return Err(DatasetError::MalformedLine {
            file: file.into(),
            line: 0,
            reason: format!("{n} vertices is too many"),
        });
    }
    Graph::from_edges(n, &triples).map_err(|e| DatasetError::MalformedLine {
        file: file.into(),
        line: 0,
        reason: e.to_string(),
    })
}
