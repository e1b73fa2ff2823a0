//! Immutable undirected weighted graphs in compressed sparse row form.
//!
//! Every undirected edge `{u, v}` is stored once in [`Graph::edges`] and twice
//! in the adjacency arrays (as the arcs `u -> v` and `v -> u`), so
//! neighbourhood scans are contiguous slices.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("node index {index} out of range for {num_nodes} nodes")]
    NodeOutOfRange { index: usize, num_nodes: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("non-finite weight on edge ({0}, {1})")]
    NonFiniteWeight(usize, usize),
    #[error("invalid parameters: {0}")]
    Parameter(String),
    #[error("generation failed: {0}")]
    Generation(String),
}

/// Seed for every random generator in the crate.
///
/// All randomness flows through [`ChaCha8Rng`], whose output stream is
/// stable across platforms and releases, so a seed pins results bit-exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent child seed, e.g. one per instance of a benchmark cell.
    pub fn derive(self, stream: u64) -> RngSeed {
        // splitmix64 finalizer
        let mut z = self.0 ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RngSeed(z ^ (z >> 31))
    }
}

impl From<u64> for RngSeed {
    fn from(value: u64) -> Self {
        RngSeed(value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

impl Edge {
    pub fn new(u: usize, v: usize, w: f64) -> Self {
        Edge { u, v, w }
    }

    pub fn unit(u: usize, v: usize) -> Self {
        Edge { u, v, w: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<Edge>,
    /// Row pointers, length `num_nodes + 1`.
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicates and out-of-range nodes.
    pub fn from_edges(num_nodes: usize, edges: Vec<Edge>) -> Result<Self, GraphError> {
        let mut seen = HashSet::with_capacity(edges.len());
        for e in &edges {
            for index in [e.u, e.v] {
                if index >= num_nodes {
                    return Err(GraphError::NodeOutOfRange { index, num_nodes });
                }
            }
            if e.u == e.v {
                return Err(GraphError::SelfLoop(e.u));
            }
            if !e.w.is_finite() {
                return Err(GraphError::NonFiniteWeight(e.u, e.v));
            }
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(GraphError::DuplicateEdge(e.u, e.v));
            }
        }

        let mut degree = vec![0usize; num_nodes];
        for e in &edges {
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        let mut offsets = Vec::with_capacity(num_nodes + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let arcs = offsets[num_nodes];
        let mut targets = vec![0usize; arcs];
        let mut weights = vec![0.0; arcs];
        let mut cursor = offsets.clone();
        for e in &edges {
            for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                targets[cursor[a]] = b;
                weights[cursor[a]] = e.w;
                cursor[a] += 1;
            }
        }
        // Sorted rows make neighbourhood sums independent of edge input order.
        for v in 0..num_nodes {
            let (lo, hi) = (offsets[v], offsets[v + 1]);
            let mut row: Vec<(usize, f64)> = targets[lo..hi]
                .iter()
                .copied()
                .zip(weights[lo..hi].iter().copied())
                .collect();
            row.sort_by_key(|&(t, _)| t);
            for (k, (t, w)) in row.into_iter().enumerate() {
                targets[lo + k] = t;
                weights[lo + k] = w;
            }
        }

        Ok(Graph {
            num_nodes,
            edges,
            offsets,
            targets,
            weights,
        })
    }

    pub fn empty(num_nodes: usize) -> Self {
        Graph::from_edges(num_nodes, Vec::new()).expect("empty graph is valid")
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn neighbor_weights(&self, v: usize) -> &[f64] {
        &self.weights[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.num_nodes).map(|v| self.degree(v)).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    /// Relabels node `v` as `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph, GraphError> {
        if perm.len() != self.num_nodes {
            return Err(GraphError::Parameter(format!(
                "permutation has length {}, graph has {} nodes",
                perm.len(),
                self.num_nodes
            )));
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Edge::new(perm[e.u], perm[e.v], e.w))
            .collect();
        Graph::from_edges(self.num_nodes, edges)
    }

    pub fn complete(n: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push(Edge::unit(u, v));
            }
        }
        Graph::from_edges(n, edges).expect("complete graph is simple")
    }

    pub fn cycle(n: usize) -> Graph {
        assert!(n >= 3, "a cycle needs at least three nodes");
        let edges = (0..n).map(|v| Edge::unit(v, (v + 1) % n)).collect();
        Graph::from_edges(n, edges).expect("cycle is simple")
    }

    pub fn path(n: usize) -> Graph {
        let edges = (1..n).map(|v| Edge::unit(v - 1, v)).collect();
        Graph::from_edges(n, edges).expect("path is simple")
    }

    /// Star with centre 0 and `leaves` leaves.
    pub fn star(leaves: usize) -> Graph {
        let edges = (1..=leaves).map(|v| Edge::unit(0, v)).collect();
        Graph::from_edges(leaves + 1, edges).expect("star is simple")
    }

    pub fn petersen() -> Graph {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push(Edge::unit(i, (i + 1) % 5));
            edges.push(Edge::unit(i, i + 5));
            edges.push(Edge::unit(5 + i, 5 + (i + 2) % 5));
        }
        Graph::from_edges(10, edges).expect("petersen graph is simple")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjacency_is_symmetric() {
        let g = Graph::from_edges(
            4,
            vec![Edge::new(0, 1, 2.0), Edge::new(2, 1, -1.0), Edge::unit(3, 0)],
        )
        .unwrap();
        assert_eq!(g.offsets().len(), 5);
        assert_eq!(*g.offsets().last().unwrap(), 2 * g.num_edges());
        for v in 0..4 {
            for (k, &u) in g.neighbors(v).iter().enumerate() {
                let back = g.neighbors(u).iter().position(|&x| x == v).unwrap();
                assert_eq!(g.neighbor_weights(v)[k], g.neighbor_weights(u)[back]);
            }
        }
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert_eq!(g.neighbor_weights(1), &[2.0, -1.0]);
    }

    #[test]
    fn rejects_malformed_edges() {
        assert_eq!(
            Graph::from_edges(2, vec![Edge::unit(1, 1)]),
            Err(GraphError::SelfLoop(1))
        );
        assert_eq!(
            Graph::from_edges(2, vec![Edge::unit(0, 1), Edge::unit(1, 0)]),
            Err(GraphError::DuplicateEdge(1, 0))
        );
        assert!(matches!(
            Graph::from_edges(2, vec![Edge::unit(0, 2)]),
            Err(GraphError::NodeOutOfRange { index: 2, .. })
        ));
    }

    #[test]
    fn named_graphs() {
        assert_eq!(Graph::complete(4).num_edges(), 6);
        let p = Graph::petersen();
        assert!(p.degrees().iter().all(|&d| d == 3));
        assert_eq!(p.num_edges(), 15);
        assert_eq!(Graph::star(5).degree(0), 5);
    }

    #[test]
    fn derived_seeds_differ() {
        let s = RngSeed(7);
        assert_ne!(s.derive(0), s.derive(1));
        assert_eq!(s.derive(3), s.derive(3));
    }
}
