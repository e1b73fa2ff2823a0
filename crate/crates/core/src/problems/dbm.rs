use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{Edge, Graph, RngSeed};
use crate::problems::{
    check_binary, check_len, Evaluation, Layout, Objective, ProblemError, ProblemKind, Violation,
};

/// Same-field and cross-field fractions of the "Matching-1" variant.
pub const MATCHING_1: f64 = 0.25;
/// Same-field and cross-field fractions of the "Matching-2" variant.
pub const MATCHING_2: f64 = 0.05;

/// Diverse bipartite matching instance, serialized as
/// `{n1, n2, C, M, p, q, lambda}` with row-major `n1 × n2` matrices.
///
/// `M[i][j] = 1` when the two endpoints share a subject field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DbmInstance {
    pub n1: usize,
    pub n2: usize,
    #[serde(rename = "C")]
    pub likelihood: Vec<f64>,
    #[serde(rename = "M")]
    pub same_field: Vec<u8>,
    /// Minimum fraction of selected pairs that share a field.
    #[serde(rename = "p")]
    pub p_frac: f64,
    /// Minimum fraction of selected pairs that do not share a field.
    #[serde(rename = "q")]
    pub q_frac: f64,
    pub lambda: [f64; 4],
}

impl DbmInstance {
    pub const DEFAULT_LAMBDA: [f64; 4] = [10.0, 10.0, 25.0, 25.0];

    /// Synthetic instance: `C ~ U[0,1]`, each node gets one of two fields uniformly.
    pub fn generate(n1: usize, n2: usize, frac: f64, seed: RngSeed) -> Self {
        let mut rng = seed.rng();
        let likelihood = (0..n1 * n2).map(|_| rng.random::<f64>()).collect();
        let left: Vec<bool> = (0..n1).map(|_| rng.random_bool(0.5)).collect();
        let right: Vec<bool> = (0..n2).map(|_| rng.random_bool(0.5)).collect();
        let same_field = (0..n1 * n2)
            .map(|k| (left[k / n2] == right[k % n2]) as u8)
            .collect();
        DbmInstance {
            n1,
            n2,
            likelihood,
            same_field,
            p_frac: frac,
            q_frac: frac,
            lambda: Self::DEFAULT_LAMBDA,
        }
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        let cells = self.n1 * self.n2;
        let bad = |msg: String| Err(ProblemError::InvalidInstance(msg));
        if self.likelihood.len() != cells || self.same_field.len() != cells {
            return bad(format!(
                "matrices must have {} entries (C has {}, M has {})",
                cells,
                self.likelihood.len(),
                self.same_field.len()
            ));
        }
        if self.same_field.iter().any(|&m| m > 1) {
            return bad("M entries must be 0 or 1".into());
        }
        if self.likelihood.iter().any(|c| !c.is_finite()) {
            return bad("C entries must be finite".into());
        }
        for (name, v) in [("p", self.p_frac), ("q", self.q_frac)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} = {v} outside [0, 1]"));
            }
        }
        if self.lambda.iter().any(|&l| !(l >= 0.0 && l.is_finite())) {
            return bad("penalty weights must be finite and nonnegative".into());
        }
        Ok(())
    }
}

/// The four constraint slacks at a relaxed or binary point.
struct Terms {
    rows: Vec<f64>,
    cols: Vec<f64>,
    same_shortfall: f64,
    cross_shortfall: f64,
}

#[derive(Debug, Clone)]
pub struct DbmProblem {
    instance: DbmInstance,
    graph: Graph,
}

impl DbmProblem {
    pub fn new(instance: DbmInstance) -> Result<Self, ProblemError> {
        instance.validate()?;
        let graph = Self::conflict_graph(instance.n1, instance.n2);
        Ok(DbmProblem { instance, graph })
    }

    pub fn instance(&self) -> &DbmInstance {
        &self.instance
    }

    /// Variables `(i, j)` and `(i', j')` are adjacent when they share a row or a column.
    fn conflict_graph(n1: usize, n2: usize) -> Graph {
        let mut edges = Vec::new();
        let id = |i: usize, j: usize| i * n2 + j;
        for i in 0..n1 {
            for j in 0..n2 {
                for j2 in j + 1..n2 {
                    edges.push(Edge::unit(id(i, j), id(i, j2)));
                }
                for i2 in i + 1..n1 {
                    edges.push(Edge::unit(id(i, j), id(i2, j)));
                }
            }
        }
        Graph::from_edges(n1 * n2, edges).expect("conflict graph is simple")
    }

    fn terms(&self, p: &[f64]) -> Terms {
        let DbmInstance {
            n1,
            n2,
            ref same_field,
            p_frac,
            q_frac,
            ..
        } = self.instance;
        let mut rows = vec![0.0; n1];
        let mut cols = vec![0.0; n2];
        let (mut total, mut same) = (0.0, 0.0);
        for i in 0..n1 {
            for j in 0..n2 {
                let v = p[i * n2 + j];
                rows[i] += v;
                cols[j] += v;
                total += v;
                if same_field[i * n2 + j] == 1 {
                    same += v;
                }
            }
        }
        Terms {
            rows,
            cols,
            same_shortfall: p_frac * total - same,
            cross_shortfall: q_frac * total - (total - same),
        }
    }
}

fn relu(x: f64) -> f64 {
    x.max(0.0)
}

/// Subgradient of relu, taking 0 at the kink.
fn step(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        0.0
    }
}

impl Objective for DbmProblem {
    fn kind(&self) -> ProblemKind {
        ProblemKind::Dbm
    }

    fn layout(&self) -> Layout {
        Layout::Binary {
            len: self.instance.n1 * self.instance.n2,
        }
    }

    fn interaction_graph(&self) -> &Graph {
        &self.graph
    }

    fn relaxed_into(&self, p: &[f64], grad: &mut [f64]) -> Result<f64, ProblemError> {
        let inst = &self.instance;
        let cells = inst.n1 * inst.n2;
        check_len(cells, p.len())?;
        check_len(cells, grad.len())?;
        let [l1, l2, l3, l4] = inst.lambda;
        let t = self.terms(p);

        let linear: f64 = inst.likelihood.iter().zip(p).map(|(c, v)| c * v).sum();
        let value = -linear
            + l1 * t.rows.iter().map(|&r| relu(r - 1.0)).sum::<f64>()
            + l2 * t.cols.iter().map(|&c| relu(c - 1.0)).sum::<f64>()
            + l3 * relu(t.same_shortfall)
            + l4 * relu(t.cross_shortfall);

        let s3 = l3 * step(t.same_shortfall);
        let s4 = l4 * step(t.cross_shortfall);
        for i in 0..inst.n1 {
            let r = l1 * step(t.rows[i] - 1.0);
            for j in 0..inst.n2 {
                let k = i * inst.n2 + j;
                let m = inst.same_field[k] as f64;
                grad[k] = -inst.likelihood[k]
                    + r
                    + l2 * step(t.cols[j] - 1.0)
                    + s3 * (inst.p_frac - m)
                    + s4 * (inst.q_frac - (1.0 - m));
            }
        }
        Ok(value)
    }

    fn evaluate(&self, x: &[u8]) -> Result<Evaluation, ProblemError> {
        let inst = &self.instance;
        check_len(inst.n1 * inst.n2, x.len())?;
        check_binary(x)?;
        let p: Vec<f64> = x.iter().map(|&b| b as f64).collect();
        let t = self.terms(&p);
        let [l1, l2, l3, l4] = inst.lambda;

        let mut violations = Vec::new();
        let mut penalty = 0.0;
        for (row, &r) in t.rows.iter().enumerate() {
            if r > 1.0 {
                violations.push(Violation::RowOverAssigned { row, excess: r - 1.0 });
                penalty += l1 * (r - 1.0);
            }
        }
        for (column, &c) in t.cols.iter().enumerate() {
            if c > 1.0 {
                violations.push(Violation::ColumnOverAssigned {
                    column,
                    excess: c - 1.0,
                });
                penalty += l2 * (c - 1.0);
            }
        }
        if t.same_shortfall > 0.0 {
            violations.push(Violation::SameFieldShortfall {
                amount: t.same_shortfall,
            });
            penalty += l3 * t.same_shortfall;
        }
        if t.cross_shortfall > 0.0 {
            violations.push(Violation::CrossFieldShortfall {
                amount: t.cross_shortfall,
            });
            penalty += l4 * t.cross_shortfall;
        }
        let objective = -inst.likelihood.iter().zip(&p).map(|(c, v)| c * v).sum::<f64>();
        Ok(Evaluation {
            objective,
            penalty,
            feasible: violations.is_empty(),
            violations,
        })
    }
}
