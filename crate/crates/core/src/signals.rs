//! Vertex signals for graphs that carry no usable node features.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::scattering::SignalSource;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("eccentricity requires a connected graph ({components} components)")]
    DisconnectedGraph { components: usize },
}

/// Hop eccentricity of every vertex on the unweighted skeleton.
pub fn eccentricity(g: &Graph) -> Result<Vec<f64>, SignalError> {
    let n = g.n();
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    let mut ecc = Vec::with_capacity(n);
    for source in 0..n {
        dist.fill(usize::MAX);
        dist[source] = 0;
        queue.push_back(source);
        let (mut reached, mut farthest) = (0, 0);
        while let Some(v) = queue.pop_front() {
            reached += 1;
            farthest = farthest.max(dist[v]);
            for &(u, _) in g.neighbors(v) {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        if reached < n {
            return Err(SignalError::DisconnectedGraph {
                components: g.connected_components().len(),
            });
        }
        ecc.push(farthest as f64);
    }
    Ok(ecc)
}

/// Local clustering coefficient `2 T(v) / (deg(v)(deg(v) − 1))`, zero when
/// `deg(v) ≤ 1`. Edge weights are ignored.
pub fn clustering_coefficient(g: &Graph) -> Vec<f64> {
    (0..g.n())
        .map(|v| {
            let nbrs = g.neighbors(v);
            let k = nbrs.len();
            if k < 2 {
                return 0.0;
            }
            let links: usize = nbrs
                .iter()
                .map(|&(a, _)| sorted_intersection(g.neighbors(a), nbrs))
                .sum();
            // each neighbor-neighbor edge is seen from both endpoints
            links as f64 / (k * (k - 1)) as f64
        })
        .collect()
}

fn sorted_intersection(a: &[(usize, f64)], b: &[(usize, f64)]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Weighted degree vector.
pub fn degree_signal(g: &Graph) -> Vec<f64> {
    g.degree().to_vec()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignalKind {
    Eccentricity,
    Clustering,
    Degree,
    /// Every numeric node-attribute column, one signal each.
    Attributes,
    /// One indicator signal per categorical node label value.
    NodeLabels,
}

impl SignalKind {
    pub fn token(self) -> &'static str {
        match self {
            SignalKind::Eccentricity => "ecc",
            SignalKind::Clustering => "clust",
            SignalKind::Degree => "deg",
            SignalKind::Attributes => "attr",
            SignalKind::NodeLabels => "label",
        }
    }
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for SignalKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "ecc" | "eccentricity" => SignalKind::Eccentricity,
            "clust" | "clustering" => SignalKind::Clustering,
            "deg" | "degree" => SignalKind::Degree,
            "attr" | "attributes" => SignalKind::Attributes,
            "label" | "labels" => SignalKind::NodeLabels,
            other => return Err(format!("unknown signal `{other}`")),
        })
    }
}

/// Parses a comma-separated signal list such as `ecc,clust,deg`.
pub fn parse_signal_list(s: &str) -> Result<Vec<SignalKind>, String> {
    let kinds = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<_>, _>>()?;
    if kinds.is_empty() {
        return Err("empty signal list".into());
    }
    Ok(kinds)
}

/// Which signals a dataset family uses by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DatasetFamily {
    /// Social graphs that are all connected (COLLAB, IMDB).
    ConnectedSocial,
    /// Social graphs that may be disconnected (REDDIT).
    DisconnectedSocial,
    /// Molecules and proteins with categorical and/or numeric node data.
    Biochemical,
}

impl DatasetFamily {
    pub fn for_dataset(name: &str) -> Self {
        let upper = name.to_ascii_uppercase();
        if upper.starts_with("REDDIT") {
            DatasetFamily::DisconnectedSocial
        } else if upper.starts_with("COLLAB") || upper.starts_with("IMDB") {
            DatasetFamily::ConnectedSocial
        } else {
            DatasetFamily::Biochemical
        }
    }

    pub fn default_kinds(self, data: &NodeData<'_>) -> Vec<SignalKind> {
        match self {
            DatasetFamily::ConnectedSocial => vec![
                SignalKind::Eccentricity,
                SignalKind::Degree,
                SignalKind::Clustering,
            ],
            DatasetFamily::DisconnectedSocial => vec![SignalKind::Degree, SignalKind::Clustering],
            DatasetFamily::Biochemical => {
                if data.labels.is_some() {
                    vec![SignalKind::NodeLabels]
                } else if data.attributes.is_some() {
                    vec![SignalKind::Attributes]
                } else {
                    vec![SignalKind::Eccentricity, SignalKind::Clustering]
                }
            }
        }
    }
}

/// Node data shipped with a dataset for one graph.
#[derive(Debug, Clone, Copy, Default)]
pub struct NodeData<'a> {
    /// One attribute row per vertex.
    pub attributes: Option<&'a [Vec<f64>]>,
    /// Categorical label per vertex.
    pub labels: Option<&'a [i64]>,
    /// Every label value present in the dataset, ascending.
    pub label_values: &'a [i64],
    /// Attribute column count across the dataset.
    pub attribute_columns: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Computed,
    Dataset,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub name: String,
    pub values: Vec<f64>,
    pub provenance: Provenance,
}

/// Ordered named signals on the vertices of one graph.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SignalSet {
    pub signals: Vec<Signal>,
}

impl SignalSet {
    pub fn names(&self) -> Vec<String> {
        self.signals.iter().map(|s| s.name.clone()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Signal> {
        self.signals.iter().find(|s| s.name == name)
    }

    fn push(&mut self, name: impl Into<String>, values: Vec<f64>, provenance: Provenance) {
        self.signals.push(Signal {
            name: name.into(),
            values,
            provenance,
        });
    }
}

impl SignalSource for SignalSet {
    fn signal(&self, name: &str) -> Option<&[f64]> {
        self.get(name).map(|s| s.values.as_slice())
    }
}

/// Signal names produced by `kinds`, independent of any particular graph.
pub fn signal_names(kinds: &[SignalKind], label_values: &[i64], attribute_columns: usize) -> Vec<String> {
    let mut names = Vec::new();
    for kind in kinds {
        match kind {
            SignalKind::Attributes => {
                names.extend((0..attribute_columns).map(|c| format!("attr{c}")));
            }
            SignalKind::NodeLabels => {
                names.extend(label_values.iter().map(|v| format!("label{v}")));
            }
            other => names.push(other.token().to_string()),
        }
    }
    names
}

/// Computes the requested signals. Eccentricity is left out for disconnected
/// graphs, as are dataset-provided signals the graph does not carry.
pub fn compute_signals(g: &Graph, kinds: &[SignalKind], data: &NodeData<'_>) -> SignalSet {
    let mut set = SignalSet::default();
    for kind in kinds {
        match kind {
            SignalKind::Eccentricity => {
                if let Ok(ecc) = eccentricity(g) {
                    set.push("ecc", ecc, Provenance::Computed);
                }
            }
            SignalKind::Clustering => set.push("clust", clustering_coefficient(g), Provenance::Computed),
            SignalKind::Degree => set.push("deg", degree_signal(g), Provenance::Computed),
            SignalKind::Attributes => {
                if let Some(rows) = data.attributes {
                    for c in 0..data.attribute_columns {
                        let column = rows.iter().map(|r| r.get(c).copied().unwrap_or(0.0)).collect();
                        set.push(format!("attr{c}"), column, Provenance::Dataset);
                    }
                }
            }
            SignalKind::NodeLabels => {
                if let Some(labels) = data.labels {
                    for &value in data.label_values {
                        let indicator = labels.iter().map(|&l| f64::from(u8::from(l == value))).collect();
                        set.push(format!("label{value}"), indicator, Provenance::Dataset);
                    }
                }
            }
        }
    }
    set
}

/// Signals a dataset family uses by default.
pub fn default_signals(g: &Graph, family: DatasetFamily, data: &NodeData<'_>) -> SignalSet {
    compute_signals(g, &family.default_kinds(data), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> Graph {
        Graph::from_unweighted(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    fn star4() -> Graph {
        Graph::from_unweighted(4, &[(0, 1), (0, 2), (0, 3)]).unwrap()
    }

    #[test]
    fn eccentricity_examples() {
        let path = Graph::from_unweighted(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(eccentricity(&path).unwrap(), vec![2.0, 1.0, 2.0]);
        assert_eq!(eccentricity(&k3()).unwrap(), vec![1.0; 3]);
        let two = Graph::from_unweighted(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(
            eccentricity(&two),
            Err(SignalError::DisconnectedGraph { components: 2 })
        );
    }

    #[test]
    fn eccentricity_ignores_weights() {
        let g = Graph::from_edges(3, &[(0, 1, 10.0), (1, 2, 0.1)]).unwrap();
        assert_eq!(eccentricity(&g).unwrap(), vec![2.0, 1.0, 2.0]);
    }

    #[test]
    fn clustering_examples() {
        assert_eq!(clustering_coefficient(&k3()), vec![1.0; 3]);
        assert_eq!(clustering_coefficient(&star4()), vec![0.0; 4]);
        let pendant = Graph::from_unweighted(4, &[(0, 1), (1, 2), (0, 2), (0, 3)]).unwrap();
        let c = clustering_coefficient(&pendant);
        assert!((c[0] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(&c[1..], &[1.0, 1.0, 0.0]);
    }

    #[test]
    fn degree_examples() {
        assert_eq!(degree_signal(&k3()), vec![2.0; 3]);
        assert_eq!(degree_signal(&star4()), vec![3.0, 1.0, 1.0, 1.0]);
        let w = Graph::from_edges(2, &[(0, 1, 2.5)]).unwrap();
        assert_eq!(degree_signal(&w), vec![2.5, 2.5]);
    }

    #[test]
    fn family_defaults() {
        let disconnected = Graph::from_unweighted(4, &[(0, 1), (2, 3)]).unwrap();
        let set = default_signals(&disconnected, DatasetFamily::for_dataset("REDDIT-BINARY"), &NodeData::default());
        assert_eq!(set.names(), vec!["deg", "clust"]);

        let set = default_signals(&k3(), DatasetFamily::for_dataset("COLLAB"), &NodeData::default());
        assert_eq!(set.names(), vec!["ecc", "deg", "clust"]);
        assert!(set.signals.iter().all(|s| s.provenance == Provenance::Computed));
    }

    #[test]
    fn attributes_pass_through() {
        let rows = vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![7.0, 8.0, 9.0]];
        let data = NodeData {
            attributes: Some(&rows),
            labels: None,
            label_values: &[],
            attribute_columns: 3,
        };
        let set = default_signals(&k3(), DatasetFamily::for_dataset("ENZYMES"), &data);
        assert_eq!(set.names(), vec!["attr0", "attr1", "attr2"]);
        assert_eq!(set.get("attr1").unwrap().values, vec![2.0, 5.0, 8.0]);
        assert_eq!(set.get("attr1").unwrap().provenance, Provenance::Dataset);
    }

    #[test]
    fn labels_one_hot() {
        let labels = [0, 2, 0];
        let data = NodeData {
            attributes: None,
            labels: Some(&labels),
            label_values: &[0, 1, 2],
            attribute_columns: 0,
        };
        let set = default_signals(&k3(), DatasetFamily::Biochemical, &data);
        assert_eq!(set.names(), signal_names(&[SignalKind::NodeLabels], &[0, 1, 2], 0));
        assert_eq!(set.get("label0").unwrap().values, vec![1.0, 0.0, 1.0]);
        assert_eq!(set.get("label1").unwrap().values, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn signal_list_parsing() {
        assert_eq!(
            parse_signal_list("ecc, clust,deg").unwrap(),
            vec![SignalKind::Eccentricity, SignalKind::Clustering, SignalKind::Degree]
        );
        assert!(parse_signal_list("ecc,bogus").is_err());
        assert!(parse_signal_list("").is_err());
    }
}
