//! Classical comparators and the exhaustive oracle.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, RngSeed};
use crate::problems::{Layout, Objective, ProblemError};

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("instance has {found} variables, budget allows {limit}")]
    TooManyNodes { found: usize, limit: usize },
    #[error("instance has {found} states, budget allows {limit}")]
    TooManyStates { found: f64, limit: u64 },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Random ranks used to break ties in node order.
fn shuffled_ranks(n: usize, seed: RngSeed) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed.rng());
    let mut rank = vec![0; n];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }
    rank
}

/// Degree-based greedy: repeatedly take a minimum residual-degree node,
/// then delete it and its neighbours. Ties follow a seed-shuffled order.
pub fn dga_mis(graph: &Graph, seed: RngSeed) -> Vec<u8> {
    let n = graph.num_nodes();
    let rank = shuffled_ranks(n, seed);
    let mut degree = graph.degrees();
    let mut alive = vec![true; n];
    let mut queue: BTreeSet<(usize, usize, usize)> = (0..n).map(|v| (degree[v], rank[v], v)).collect();
    let mut x = vec![0u8; n];
    while let Some((_, _, v)) = queue.pop_first() {
        x[v] = 1;
        alive[v] = false;
        for &u in graph.neighbors(v) {
            if !alive[u] {
                continue;
            }
            alive[u] = false;
            queue.remove(&(degree[u], rank[u], u));
            for &w in graph.neighbors(u) {
                if alive[w] {
                    queue.remove(&(degree[w], rank[w], w));
                    degree[w] -= 1;
                    queue.insert((degree[w], rank[w], w));
                }
            }
        }
    }
    x
}

/// Random greedy: visit nodes in a uniformly random order, keeping each one
/// that has no kept neighbour. Equivalent to picking uniformly among residual nodes.
pub fn rga_mis(graph: &Graph, seed: RngSeed) -> Vec<u8> {
    let n = graph.num_nodes();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed.rng());
    let mut x = vec![0u8; n];
    let mut blocked = vec![false; n];
    for v in order {
        if !blocked[v] {
            x[v] = 1;
            blocked[v] = true;
            for &u in graph.neighbors(v) {
                blocked[u] = true;
            }
        }
    }
    x
}

/// Change in cut weight if `v` switched sides.
fn flip_gain(graph: &Graph, side: &[u8], v: usize) -> f64 {
    graph
        .neighbors(v)
        .iter()
        .zip(graph.neighbor_weights(v))
        .map(|(&u, &w)| if side[u] == side[v] { w } else { -w })
        .sum()
}

/// Sequential placement in a seed-shuffled order followed by 1-flip improvement
/// sweeps until no single flip increases the cut.
pub fn greedy_maxcut(graph: &Graph, seed: RngSeed) -> Vec<u8> {
    let n = graph.num_nodes();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed.rng());
    let mut placed = vec![false; n];
    let mut side = vec![0u8; n];
    for &v in &order {
        // weight to already-placed neighbours on each side
        let mut to = [0.0, 0.0];
        for (&u, &w) in graph.neighbors(v).iter().zip(graph.neighbor_weights(v)) {
            if placed[u] {
                to[side[u] as usize] += w;
            }
        }
        // joining side s cuts the edges to the other side
        side[v] = if to[0] > to[1] { 1 } else { 0 };
        placed[v] = true;
    }
    loop {
        let mut improved = false;
        for &v in &order {
            if flip_gain(graph, &side, v) > 1e-12 {
                side[v] ^= 1;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    side
}

/// Whether no node can flip to increase the cut.
pub fn is_one_flip_optimal(graph: &Graph, side: &[u8]) -> bool {
    (0..graph.num_nodes()).all(|v| flip_gain(graph, side, v) <= 1e-12)
}

/// Whether `x` is an independent set to which no node can be added.
pub fn is_maximal_independent_set(graph: &Graph, x: &[u8]) -> bool {
    let independent = graph.edges().iter().all(|e| x[e.u] == 0 || x[e.v] == 0);
    let maximal = (0..graph.num_nodes())
        .all(|v| x[v] == 1 || graph.neighbors(v).iter().any(|&u| x[u] == 1));
    independent && maximal
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBudget {
    pub max_nodes: usize,
    pub max_states: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_nodes: 20,
            max_states: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactSolution {
    /// Minimizer of the penalized objective `f(x) + Σ λ v(x)`.
    pub x: Vec<u8>,
    pub penalized_cost: f64,
    /// Minimizer of `f(x)` among feasible states, when one exists.
    pub feasible: Option<(Vec<u8>, f64)>,
    pub states: u64,
}

/// Exhaustive enumeration; one-hot layouts are enumerated in mixed radix.
pub fn brute_force(problem: &dyn Objective, budget: OracleBudget) -> Result<ExactSolution, BaselineError> {
    let layout = problem.layout();
    let (rows, classes) = match layout {
        Layout::Binary { len } => (len, 2),
        Layout::OneHot { rows, classes } => (rows, classes),
    };
    if rows > budget.max_nodes {
        return Err(BaselineError::TooManyNodes {
            found: rows,
            limit: budget.max_nodes,
        });
    }
    let states = (classes as f64).powi(rows as i32);
    if states > budget.max_states as f64 {
        return Err(BaselineError::TooManyStates {
            found: states,
            limit: budget.max_states,
        });
    }
    let states = states as u64;
    let mut digits = vec![0usize; rows];
    let mut x = vec![0u8; layout.num_vars()];
    let mut best: Option<(Vec<u8>, f64)> = None;
    let mut best_feasible: Option<(Vec<u8>, f64)> = None;
    for _ in 0..states {
        match layout {
            Layout::Binary { .. } => {
                for (xi, &d) in x.iter_mut().zip(&digits) {
                    *xi = d as u8;
                }
            }
            Layout::OneHot { .. } => {
                x.fill(0);
                for (r, &d) in digits.iter().enumerate() {
                    x[r * classes + d] = 1;
                }
            }
        }
        let e = problem.evaluate(&x)?;
        if best.as_ref().is_none_or(|(_, c)| e.penalized() < *c) {
            best = Some((x.clone(), e.penalized()));
        }
        if e.feasible && best_feasible.as_ref().is_none_or(|(_, c)| e.objective < *c) {
            best_feasible = Some((x.clone(), e.objective));
        }
        for d in digits.iter_mut() {
            *d += 1;
            if *d < classes {
                break;
            }
            *d = 0;
        }
    }
    let (x, penalized_cost) = best.unwrap_or((Vec::new(), 0.0));
    Ok(ExactSolution {
        x,
        penalized_cost,
        feasible: best_feasible,
        states,
    })
}
