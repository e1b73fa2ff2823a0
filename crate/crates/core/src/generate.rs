//! Random graph generators.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{Edge, Graph, GraphError, RngSeed};

/// Restarts allowed before [`generate_rrg`] gives up.
pub const RRG_MAX_RESTARTS: usize = 10_000;

/// Uniform-ish random `d`-regular graph on `n` nodes.
///
/// Pairing model: `n * d` half-edges ("stubs") are shuffled and paired. Pairs
/// that would form a self-loop or a repeated edge are returned to the pool and
/// re-paired in the next round; if no valid pair can be formed from the pool
/// the attempt restarts from scratch.
pub fn generate_rrg(n: usize, d: usize, seed: RngSeed) -> Result<Graph, GraphError> {
    if (n * d) % 2 != 0 {
        return Err(GraphError::Parameter(format!(
            "n * d must be even (n = {n}, d = {d})"
        )));
    }
    if d >= n && !(n == 0 && d == 0) {
        return Err(GraphError::Parameter(format!(
            "degree {d} must be smaller than node count {n}"
        )));
    }
    if d == 0 {
        return Ok(Graph::empty(n));
    }

    let mut rng = seed.rng();
    for _ in 0..RRG_MAX_RESTARTS {
        if let Some(edges) = try_pairing(n, d, &mut rng) {
            let edges = edges.into_iter().map(|(u, v)| Edge::unit(u, v)).collect();
            return Graph::from_edges(n, edges);
        }
    }
    Err(GraphError::Generation(format!(
        "no simple {d}-regular graph on {n} nodes after {RRG_MAX_RESTARTS} restarts"
    )))
}

fn try_pairing<R: Rng>(n: usize, d: usize, rng: &mut R) -> Option<BTreeSet<(usize, usize)>> {
    let mut edges = BTreeSet::new();
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    let mut leftover = vec![0usize; n];

    while !stubs.is_empty() {
        stubs.shuffle(rng);
        leftover.iter_mut().for_each(|c| *c = 0);
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a != b && !edges.contains(&(a, b)) {
                edges.insert((a, b));
            } else {
                leftover[a] += 1;
                leftover[b] += 1;
            }
        }
        if !pairable(&edges, &leftover) {
            return None;
        }
        stubs = leftover
            .iter()
            .enumerate()
            .flat_map(|(v, &c)| std::iter::repeat_n(v, c))
            .collect();
    }
    Some(edges)
}

/// Whether at least one valid new edge exists among nodes with free stubs.
fn pairable(edges: &BTreeSet<(usize, usize)>, leftover: &[usize]) -> bool {
    let open: Vec<usize> = (0..leftover.len()).filter(|&v| leftover[v] > 0).collect();
    if open.is_empty() {
        return true;
    }
    for (i, &a) in open.iter().enumerate() {
        for &b in &open[i + 1..] {
            if !edges.contains(&(a, b)) {
                return true;
            }
        }
    }
    false
}

/// Erdős–Rényi graph: every unordered pair is an edge with probability `edge_prob`.
pub fn generate_erg(n: usize, edge_prob: f64, seed: RngSeed) -> Result<Graph, GraphError> {
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(GraphError::Parameter(format!(
            "edge probability {edge_prob} outside [0, 1]"
        )));
    }
    let mut rng = seed.rng();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(edge_prob) {
                edges.push(Edge::unit(u, v));
            }
        }
    }
    Graph::from_edges(n, edges)
}
