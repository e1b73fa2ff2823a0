use crate::graph::Graph;
use crate::problems::{
    check_binary, check_len, Evaluation, Layout, Objective, ProblemError, ProblemKind, Violation,
};

/// Maximum independent set as `−Σ x_i + λ Σ_{(i,j)∈E} x_i x_j`.
///
/// Feasible optima are guaranteed only for `lambda > 1`; edge weights are ignored.
#[derive(Debug, Clone)]
pub struct MisProblem {
    graph: Graph,
    lambda: f64,
}

impl MisProblem {
    pub const DEFAULT_LAMBDA: f64 = 2.0;

    pub fn new(graph: Graph, lambda: f64) -> Result<Self, ProblemError> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(ProblemError::InvalidInstance(format!(
                "penalty weight must be finite and nonnegative, got {lambda}"
            )));
        }
        Ok(MisProblem { graph, lambda })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl Objective for MisProblem {
    fn kind(&self) -> ProblemKind {
        ProblemKind::Mis
    }

    fn layout(&self) -> Layout {
        Layout::Binary {
            len: self.graph.num_nodes(),
        }
    }

    fn interaction_graph(&self) -> &Graph {
        &self.graph
    }

    fn relaxed_into(&self, p: &[f64], grad: &mut [f64]) -> Result<f64, ProblemError> {
        let n = self.graph.num_nodes();
        check_len(n, p.len())?;
        check_len(n, grad.len())?;
        let mut value = 0.0;
        for v in 0..n {
            let neighbour_mass: f64 = self.graph.neighbors(v).iter().map(|&u| p[u]).sum();
            grad[v] = -1.0 + self.lambda * neighbour_mass;
            // each edge is seen from both ends
            value += -p[v] + 0.5 * self.lambda * p[v] * neighbour_mass;
        }
        Ok(value)
    }

    fn evaluate(&self, x: &[u8]) -> Result<Evaluation, ProblemError> {
        check_len(self.graph.num_nodes(), x.len())?;
        check_binary(x)?;
        let size = x.iter().filter(|&&b| b == 1).count();
        let violations: Vec<Violation> = self
            .graph
            .edges()
            .iter()
            .filter(|e| x[e.u] == 1 && x[e.v] == 1)
            .map(|e| Violation::AdjacentPair { u: e.u, v: e.v })
            .collect();
        Ok(Evaluation {
            objective: -(size as f64),
            penalty: self.lambda * violations.len() as f64,
            feasible: violations.is_empty(),
            violations,
        })
    }
}
