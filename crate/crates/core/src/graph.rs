//! Weighted undirected graphs and the linear operators built on them.
//!
//! Adjacency is held as sorted per-vertex neighbor lists. The lazy random walk
//! `P = ½(I + A D⁻¹)` is never materialized; [`Graph::lazy_walk`] applies it to
//! a vector in a single pass over the edge lists.

use std::collections::VecDeque;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("edge ({u}, {v}) appears more than once")]
    DuplicateEdge { u: usize, v: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("edge ({u}, {v}) has non-positive or non-finite weight {weight}")]
    NonPositiveWeight { u: usize, v: usize, weight: f64 },
    #[error("vertex index {index} out of range for graph with {n} vertices")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("vertex {0} has zero degree")]
    IsolatedVertex(usize),
    #[error("expected vector of length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
}

/// A weighted undirected graph without self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    neighbors: Vec<Vec<(usize, f64)>>,
    degree: Vec<f64>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph from an undirected edge list. Each edge must appear once,
    /// in either orientation.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self, GraphError> {
        let mut neighbors: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(u, v, w) in edges {
            for index in [u, v] {
                if index >= n {
                    return Err(GraphError::IndexOutOfRange { index, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(GraphError::NonPositiveWeight { u, v, weight: w });
            }
            neighbors[u].push((v, w));
            neighbors[v].push((u, w));
        }
        for (u, list) in neighbors.iter_mut().enumerate() {
            list.sort_by_key(|&(v, _)| v);
            if let Some(pair) = list.windows(2).find(|p| p[0].0 == p[1].0) {
                let v = pair[0].0;
                return Err(GraphError::DuplicateEdge { u: u.min(v), v: u.max(v) });
            }
        }
        let degree = neighbors
            .iter()
            .map(|list| list.iter().map(|&(_, w)| w).sum())
            .collect();
        Ok(Self {
            neighbors,
            degree,
            edge_count: edges.len(),
        })
    }

    /// Builds an unweighted graph (all weights 1).
    pub fn from_unweighted(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let weighted: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        Self::from_edges(n, &weighted)
    }

    pub fn n(&self) -> usize {
        self.neighbors.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Weighted degree vector `d(v) = Σ_u A(v, u)`.
    pub fn degree(&self) -> &[f64] {
        &self.degree
    }

    /// Neighbors of `v` with edge weights, sorted by neighbor index.
    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.neighbors[v]
    }

    /// Edge weight between `u` and `v`, zero when absent.
    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.neighbors[u]
            .binary_search_by_key(&v, |&(x, _)| x)
            .map(|i| self.neighbors[u][i].1)
            .unwrap_or(0.0)
    }

    /// Undirected edges as `(u, v, w)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.neighbors.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .filter(move |&&(v, _)| u < v)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    /// Relabels vertices so that old vertex `v` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self, GraphError> {
        if perm.len() != self.n() {
            return Err(GraphError::DimensionMismatch {
                expected: self.n(),
                actual: perm.len(),
            });
        }
        let edges: Vec<_> = self.edges().map(|(u, v, w)| (perm[u], perm[v], w)).collect();
        Self::from_edges(self.n(), &edges)
    }

    fn check_len(&self, x: &[f64]) -> Result<(), GraphError> {
        if x.len() != self.n() {
            return Err(GraphError::DimensionMismatch {
                expected: self.n(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// The symmetric normalized Laplacian `N = I − D^{-1/2} A D^{-1/2}`.
    pub fn normalized_laplacian(&self) -> Result<NormalizedLaplacian<'_>, GraphError> {
        if let Some(v) = self.degree.iter().position(|&d| d <= 0.0) {
            return Err(GraphError::IsolatedVertex(v));
        }
        Ok(NormalizedLaplacian {
            graph: self,
            inv_sqrt_degree: self.degree.iter().map(|d| d.sqrt().recip()).collect(),
        })
    }

    /// Applies the lazy random walk `P = ½(I + A D⁻¹)` to `x`.
    ///
    /// An isolated vertex keeps its own mass (its column of `P` is the unit
    /// vector), so `P` stays column-stochastic on graphs with isolated vertices.
    pub fn lazy_walk(&self, x: &[f64]) -> Result<Vec<f64>, GraphError> {
        self.check_len(x)?;
        let mut out = vec![0.0; x.len()];
        self.lazy_walk_into(x, &mut out);
        Ok(out)
    }

    pub(crate) fn lazy_walk_into(&self, x: &[f64], out: &mut [f64]) {
        for (v, list) in self.neighbors.iter().enumerate() {
            if list.is_empty() {
                out[v] = x[v];
                continue;
            }
            let spread: f64 = list.iter().map(|&(u, w)| w * x[u] / self.degree[u]).sum();
            out[v] = 0.5 * (x[v] + spread);
        }
    }

    /// Connected components in order of their smallest vertex; each component
    /// lists its vertices in ascending order.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut components = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            queue.push_back(start);
            let mut component = Vec::new();
            while let Some(v) = queue.pop_front() {
                component.push(v);
                for &(u, _) in &self.neighbors[v] {
                    if !seen[u] {
                        seen[u] = true;
                        queue.push_back(u);
                    }
                }
            }
            component.sort_unstable();
            components.push(component);
        }
        components
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() <= 1
    }
}

/// Sparse view of the normalized Laplacian of a graph with no isolated vertices.
#[derive(Debug, Clone)]
pub struct NormalizedLaplacian<'g> {
    graph: &'g Graph,
    inv_sqrt_degree: Vec<f64>,
}

impl NormalizedLaplacian<'_> {
    pub fn entry(&self, u: usize, v: usize) -> f64 {
        let off = -self.graph.weight(u, v) * self.inv_sqrt_degree[u] * self.inv_sqrt_degree[v];
        if u == v {
            1.0 + off
        } else {
            off
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, GraphError> {
        self.graph.check_len(x)?;
        let s = &self.inv_sqrt_degree;
        Ok((0..x.len())
            .map(|v| {
                let off: f64 = self
                    .graph
                    .neighbors(v)
                    .iter()
                    .map(|&(u, w)| w * s[u] * x[u])
                    .sum();
                x[v] - s[v] * off
            })
            .collect())
    }

    /// Row-major dense copy, for diagnostics and small-graph checks.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.graph.n();
        (0..n)
            .map(|u| (0..n).map(|v| self.entry(u, v)).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> Graph {
        Graph::from_unweighted(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn degrees_of_small_graphs() {
        let k2 = Graph::from_unweighted(2, &[(0, 1)]).unwrap();
        assert_eq!(k2.degree(), &[1.0, 1.0]);
        assert_eq!(k3().degree(), &[2.0, 2.0, 2.0]);
    }

    #[test]
    fn rejects_bad_edges() {
        assert_eq!(
            Graph::from_edges(3, &[(0, 1, 1.0), (0, 1, 2.0)]),
            Err(GraphError::DuplicateEdge { u: 0, v: 1 })
        );
        assert_eq!(
            Graph::from_edges(3, &[(0, 1, 1.0), (1, 0, 1.0)]),
            Err(GraphError::DuplicateEdge { u: 0, v: 1 })
        );
        assert_eq!(
            Graph::from_edges(3, &[(2, 2, 1.0)]),
            Err(GraphError::SelfLoop(2))
        );
        assert!(matches!(
            Graph::from_edges(3, &[(0, 1, 0.0)]),
            Err(GraphError::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            Graph::from_edges(3, &[(0, 1, f64::NAN)]),
            Err(GraphError::NonPositiveWeight { .. })
        ));
        assert_eq!(
            Graph::from_edges(3, &[(0, 3, 1.0)]),
            Err(GraphError::IndexOutOfRange { index: 3, n: 3 })
        );
    }

    #[test]
    fn laplacian_of_k2_and_k3() {
        let k2 = Graph::from_unweighted(2, &[(0, 1)]).unwrap();
        assert_eq!(
            k2.normalized_laplacian().unwrap().to_dense(),
            vec![vec![1.0, -1.0], vec![-1.0, 1.0]]
        );
        let n = k3().normalized_laplacian().unwrap().to_dense();
        for (u, row) in n.iter().enumerate() {
            for (v, &x) in row.iter().enumerate() {
                let expected = if u == v { 1.0 } else { -0.5 };
                assert!((x - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn laplacian_annihilates_sqrt_degree() {
        let g = Graph::from_edges(4, &[(0, 1, 2.0), (1, 2, 0.5), (2, 3, 1.5), (0, 2, 1.0)]).unwrap();
        let sqrt_d: Vec<f64> = g.degree().iter().map(|d| d.sqrt()).collect();
        let out = g.normalized_laplacian().unwrap().apply(&sqrt_d).unwrap();
        assert!(out.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn laplacian_rejects_isolated_vertex() {
        let g = Graph::from_unweighted(3, &[(0, 1)]).unwrap();
        assert_eq!(
            g.normalized_laplacian().unwrap_err(),
            GraphError::IsolatedVertex(2)
        );
    }

    #[test]
    fn lazy_walk_examples() {
        let k2 = Graph::from_unweighted(2, &[(0, 1)]).unwrap();
        assert_eq!(k2.lazy_walk(&[1.0, 0.0]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(k3().lazy_walk(&[1.0, 0.0, 0.0]).unwrap(), vec![0.5, 0.25, 0.25]);
        assert_eq!(
            k3().lazy_walk(&[1.0, 0.0]),
            Err(GraphError::DimensionMismatch { expected: 3, actual: 2 })
        );
    }

    #[test]
    fn degree_is_fixed_point() {
        let g = Graph::from_edges(5, &[(0, 1, 1.0), (1, 2, 3.0), (2, 3, 0.25), (3, 4, 2.0), (4, 0, 1.0)])
            .unwrap();
        let d = g.degree().to_vec();
        let pd = g.lazy_walk(&d).unwrap();
        for (a, b) in pd.iter().zip(&d) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn isolated_vertex_keeps_mass() {
        let g = Graph::from_unweighted(3, &[(0, 1)]).unwrap();
        let out = g.lazy_walk(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(out, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn components() {
        assert_eq!(k3().connected_components(), vec![vec![0, 1, 2]]);
        let two = Graph::from_unweighted(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(two.connected_components(), vec![vec![0, 1], vec![2, 3]]);
        let single = Graph::from_unweighted(1, &[]).unwrap();
        assert_eq!(single.connected_components(), vec![vec![0]]);
        assert!(single.is_connected());
        assert!(!two.is_connected());
    }

    #[test]
    fn permutation_relabels_edges() {
        let g = Graph::from_edges(3, &[(0, 1, 2.0), (1, 2, 1.0)]).unwrap();
        let p = g.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.weight(2, 0), 2.0);
        assert_eq!(p.weight(0, 1), 1.0);
        assert_eq!(p.weight(2, 1), 0.0);
    }
}
