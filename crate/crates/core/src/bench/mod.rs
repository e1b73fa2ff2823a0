//! Metrics, reference values, benchmark suites and their on-disk outputs.

mod output;
mod suite;

pub use output::{
    write_metrics_csv, write_outputs, write_summary_json, write_sweep_csv, write_trace_csv,
    METRICS_HEADER, TRACE_HEADER,
};
pub use suite::{
    run_benchmark, run_sweep, sweep_alpha, BenchOptions, BenchOutcome, BenchProblem, CellFailure,
    GraphFamily, InstanceOutcome, MetricReport, SolverKind, SuiteSpec, SweepRow, SweepSpec,
    TraceRecord,
};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::formats::ParseError;
use crate::graph::{Graph, GraphError};
use crate::penalty::PenaltyError;
use crate::solver::SolveError;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid suite: {0}")]
    Spec(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error("reference table {path}: {message}")]
    Reference { path: PathBuf, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Penalty(#[from] PenaltyError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl BenchError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Constant `P*` of the large-degree MaxCut asymptotics on random regular graphs.
pub const P_STAR: f64 = 0.7632;

/// Upper bound on the cut ratio of a `d`-regular random graph: `d/4 + P* √(d/4)`.
pub fn maxcut_upper_bound(d: f64) -> f64 {
    d / 4.0 + P_STAR * (d / 4.0).sqrt()
}

/// Large-degree IS densities `(2 ln d / d, ln d / d)`: the maximum and the best
/// density any known algorithm reaches.
pub fn mis_asymptotic_density(d: f64) -> (f64, f64) {
    let alg = d.ln() / d;
    (2.0 * alg, alg)
}

pub fn is_density(x: &[u8]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().filter(|&&b| b == 1).count() as f64 / x.len() as f64
}

pub fn cut_ratio(graph: &Graph, x: &[u8]) -> f64 {
    let cut: f64 = graph
        .edges()
        .iter()
        .filter(|e| x[e.u] != x[e.v])
        .map(|e| e.w)
        .sum();
    cut / graph.num_nodes().max(1) as f64
}

/// `achieved / reference` for maximization metrics; `None` without a usable reference.
pub fn apr(achieved: f64, reference: Option<f64>) -> Option<f64> {
    match reference {
        Some(r) if r > 0.0 && r.is_finite() && achieved.is_finite() => Some(achieved / r),
        _ => None,
    }
}

/// Mean and sample standard deviation (zero for fewer than two values).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Best-known cut values of Gset instances, keyed by name (`G14`, ...).
pub const GSET_BEST_KNOWN: &[(&str, f64)] = &[
    ("G1", 11624.0),
    ("G2", 11620.0),
    ("G3", 11622.0),
    ("G4", 11646.0),
    ("G5", 11631.0),
    ("G14", 3064.0),
    ("G15", 3050.0),
    ("G16", 3052.0),
    ("G17", 3047.0),
    ("G22", 13359.0),
    ("G23", 13344.0),
    ("G24", 13337.0),
    ("G25", 13340.0),
    ("G26", 13328.0),
    ("G35", 7687.0),
    ("G36", 7680.0),
    ("G37", 7691.0),
    ("G38", 7688.0),
    ("G43", 6660.0),
    ("G44", 6650.0),
    ("G45", 6654.0),
    ("G46", 6649.0),
    ("G47", 6657.0),
    ("G48", 6000.0),
    ("G49", 6000.0),
    ("G50", 5880.0),
    ("G51", 3848.0),
    ("G52", 3851.0),
    ("G53", 3850.0),
    ("G54", 3852.0),
    ("G55", 10294.0),
    ("G58", 19263.0),
    ("G60", 14176.0),
    ("G63", 26997.0),
    ("G70", 9541.0),
];

/// Looks up a Gset name, ignoring case and any file extension.
pub fn gset_best_known(name: &str) -> Option<f64> {
    let stem = name.split('.').next().unwrap_or(name);
    GSET_BEST_KNOWN
        .iter()
        .find(|(k, _)| k.eq_ignore_ascii_case(stem))
        .map(|&(_, v)| v)
}

/// File name of the finite-degree MIS density table inside the data directory.
pub const MIS_THEORY_FILE: &str = "mis_rho_d.csv";

/// Reads `d,rho` rows (a header line is allowed) into a degree-keyed table.
pub fn load_mis_theory(path: &Path) -> Result<BTreeMap<u64, f64>, BenchError> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    let bad = |message: String| BenchError::Reference {
        path: path.to_path_buf(),
        message,
    };
    let mut table = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split(',').map(str::trim);
        let (d, rho) = (it.next().unwrap_or(""), it.next().unwrap_or(""));
        match (d.parse::<u64>(), rho.parse::<f64>()) {
            (Ok(d), Ok(rho)) => {
                table.insert(d, rho);
            }
            _ if i == 0 => {}
            _ => return Err(bad(format!("line {}: expected `d,rho`", i + 1))),
        }
    }
    Ok(table)
}

/// Where a metric's denominator comes from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    /// Theory for random regular graphs, the Gset table for files, else the exact oracle.
    #[default]
    Auto,
    Theory,
    BestKnown,
    Exact,
    None,
}

impl std::fmt::Display for ReferenceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ReferenceKind::Auto => "auto",
            ReferenceKind::Theory => "theory",
            ReferenceKind::BestKnown => "best_known",
            ReferenceKind::Exact => "exact",
            ReferenceKind::None => "none",
        })
    }
}

/// First 16 hex digits of the SHA-256 of a serializable value's JSON.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("configuration serializes");
    Sha256::digest(&json)
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");
