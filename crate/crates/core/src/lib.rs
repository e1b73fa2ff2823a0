//! Constraint-relaxed annealing for combinatorial optimization.
//!
//! Problems expose a relaxed loss with analytic gradients, a model maps
//! learnable parameters to relaxed probabilities, and the solver minimizes the
//! relaxed loss plus an annealed discreteness penalty before rounding.

pub mod baselines;
pub mod bench;
pub mod formats;
pub mod generate;
pub mod graph;
pub mod model;
pub mod optimizer;
pub mod penalty;
pub mod problems;
pub mod solver;

pub use graph::{Edge, Graph, GraphError, RngSeed};
