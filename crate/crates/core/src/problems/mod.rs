//! Relaxed penalized objectives and their discrete evaluators.
//!
//! Each problem maps a relaxed state `p` (binary relaxation in `[0,1]^n`, or
//! row-stochastic matrix for one-hot encodings) to a loss and its analytic
//! gradient. On binary inputs the relaxed loss equals the discrete objective
//! plus the weighted constraint penalties.

mod coloring;
mod dbm;
mod maxcut;
mod mis;

pub use coloring::ColoringProblem;
pub use dbm::{DbmInstance, DbmProblem, MATCHING_1, MATCHING_2};
pub use maxcut::MaxCutProblem;
pub use mis::MisProblem;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Error, PartialEq)]
pub enum ProblemError {
    #[error("expected {expected} variables, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("variable {index} is {value}, expected 0 or 1")]
    NonBinary { index: usize, value: u8 },
    #[error("row {row} is not one-hot")]
    NotOneHot { row: usize },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Mis,
    MaxCut,
    Dbm,
    Coloring,
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProblemKind::Mis => "mis",
            ProblemKind::MaxCut => "maxcut",
            ProblemKind::Dbm => "dbm",
            ProblemKind::Coloring => "coloring",
        })
    }
}

/// Shape of the decision variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Layout {
    /// One binary variable per entity.
    Binary { len: usize },
    /// One categorical variable per row, stored one-hot, row-major.
    OneHot { rows: usize, classes: usize },
}

impl Layout {
    pub fn num_vars(&self) -> usize {
        match *self {
            Layout::Binary { len } => len,
            Layout::OneHot { rows, classes } => rows * classes,
        }
    }

    /// Entities carrying the variables: nodes of the interaction graph.
    pub fn rows(&self) -> usize {
        match *self {
            Layout::Binary { len } => len,
            Layout::OneHot { rows, .. } => rows,
        }
    }

    pub fn classes(&self) -> usize {
        match *self {
            Layout::Binary { .. } => 1,
            Layout::OneHot { classes, .. } => classes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Violation {
    AdjacentPair { u: usize, v: usize },
    RowOverAssigned { row: usize, excess: f64 },
    ColumnOverAssigned { column: usize, excess: f64 },
    SameFieldShortfall { amount: f64 },
    CrossFieldShortfall { amount: f64 },
}

/// Discrete evaluation of a binary (or one-hot) solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// The unpenalized cost `f(x)`.
    pub objective: f64,
    /// `Σ λ_i v_i(x)`; zero exactly when feasible.
    pub penalty: f64,
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

impl Evaluation {
    pub fn penalized(&self) -> f64 {
        self.objective + self.penalty
    }

    fn feasible(objective: f64) -> Self {
        Evaluation {
            objective,
            penalty: 0.0,
            feasible: true,
            violations: Vec::new(),
        }
    }
}

pub trait Objective: Send + Sync {
    fn kind(&self) -> ProblemKind;

    fn layout(&self) -> Layout;

    fn num_vars(&self) -> usize {
        self.layout().num_vars()
    }

    /// Graph whose nodes are the rows of [`Objective::layout`]; message passing runs on it.
    fn interaction_graph(&self) -> &Graph;

    /// Writes `∂l̂/∂p` into `grad` and returns `l̂(p)`.
    fn relaxed_into(&self, p: &[f64], grad: &mut [f64]) -> Result<f64, ProblemError>;

    fn relaxed_loss(&self, p: &[f64]) -> Result<(f64, Vec<f64>), ProblemError> {
        let mut grad = vec![0.0; p.len()];
        let value = self.relaxed_into(p, &mut grad)?;
        Ok((value, grad))
    }

    fn evaluate(&self, x: &[u8]) -> Result<Evaluation, ProblemError>;
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<(), ProblemError> {
    if expected == found {
        Ok(())
    } else {
        Err(ProblemError::DimensionMismatch { expected, found })
    }
}

pub(crate) fn check_binary(x: &[u8]) -> Result<(), ProblemError> {
    match x.iter().position(|&v| v > 1) {
        Some(index) => Err(ProblemError::NonBinary {
            index,
            value: x[index],
        }),
        None => Ok(()),
    }
}
