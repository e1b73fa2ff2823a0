use crate::graph::Graph;
use crate::problems::{check_binary, check_len, Evaluation, Layout, Objective, ProblemError, ProblemKind};

/// Weighted MaxCut as `Σ_{(i,j)∈E} A_ij (2 x_i x_j − x_i − x_j)`, i.e. minus the cut weight.
#[derive(Debug, Clone)]
pub struct MaxCutProblem {
    graph: Graph,
}

impl MaxCutProblem {
    pub fn new(graph: Graph) -> Self {
        MaxCutProblem { graph }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn cut_weight(&self, x: &[u8]) -> f64 {
        self.graph
            .edges()
            .iter()
            .filter(|e| x[e.u] != x[e.v])
            .map(|e| e.w)
            .sum()
    }
}

impl Objective for MaxCutProblem {
    fn kind(&self) -> ProblemKind {
        ProblemKind::MaxCut
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
        for v in 0..n {
            grad[v] = self
                .graph
                .neighbors(v)
                .iter()
                .zip(self.graph.neighbor_weights(v))
                .map(|(&u, &w)| w * (2.0 * p[u] - 1.0))
                .sum();
        }
        let value = self
            .graph
            .edges()
            .iter()
            .map(|e| e.w * (2.0 * p[e.u] * p[e.v] - p[e.u] - p[e.v]))
            .sum();
        Ok(value)
    }

    fn evaluate(&self, x: &[u8]) -> Result<Evaluation, ProblemError> {
        check_len(self.graph.num_nodes(), x.len())?;
        check_binary(x)?;
        Ok(Evaluation::feasible(-self.cut_weight(x)))
    }
}
