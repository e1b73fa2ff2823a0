use crate::graph::Graph;
use crate::problems::{check_binary, check_len, Evaluation, Layout, Objective, ProblemError, ProblemKind};

/// Graph `K`-coloring as the relaxed count of monochromatic edges,
/// `Σ_{(i,j)∈E} Σ_k P_ik P_jk`, to be minimized.
///
/// The Kronecker-delta form is usually written `f(x) = −Σ_{(i,j)∈E} δ(x_i, x_j)`;
/// minimizing that would *reward* conflicts, so the sign is flipped here.
#[derive(Debug, Clone)]
pub struct ColoringProblem {
    graph: Graph,
    num_colors: usize,
}

impl ColoringProblem {
    pub fn new(graph: Graph, num_colors: usize) -> Result<Self, ProblemError> {
        if num_colors < 2 {
            return Err(ProblemError::InvalidInstance(format!(
                "need at least two colors, got {num_colors}"
            )));
        }
        Ok(ColoringProblem { graph, num_colors })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }

    /// Color index of each node from a one-hot matrix.
    pub fn colors(&self, x: &[u8]) -> Result<Vec<usize>, ProblemError> {
        check_len(self.graph.num_nodes() * self.num_colors, x.len())?;
        check_binary(x)?;
        x.chunks_exact(self.num_colors)
            .enumerate()
            .map(|(row, chunk)| {
                let mut hot = chunk.iter().enumerate().filter(|(_, &b)| b == 1);
                match (hot.next(), hot.next()) {
                    (Some((k, _)), None) => Ok(k),
                    _ => Err(ProblemError::NotOneHot { row }),
                }
            })
            .collect()
    }
}

impl Objective for ColoringProblem {
    fn kind(&self) -> ProblemKind {
        ProblemKind::Coloring
    }

    fn layout(&self) -> Layout {
        Layout::OneHot {
            rows: self.graph.num_nodes(),
            classes: self.num_colors,
        }
    }

    fn interaction_graph(&self) -> &Graph {
        &self.graph
    }

    fn relaxed_into(&self, p: &[f64], grad: &mut [f64]) -> Result<f64, ProblemError> {
        let k = self.num_colors;
        let expected = self.graph.num_nodes() * k;
        check_len(expected, p.len())?;
        check_len(expected, grad.len())?;
        grad.fill(0.0);
        let mut value = 0.0;
        for e in self.graph.edges() {
            let (a, b) = (&p[e.u * k..(e.u + 1) * k], &p[e.v * k..(e.v + 1) * k]);
            value += a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
            for c in 0..k {
                grad[e.u * k + c] += b[c];
                grad[e.v * k + c] += a[c];
            }
        }
        Ok(value)
    }

    fn evaluate(&self, x: &[u8]) -> Result<Evaluation, ProblemError> {
        let colors = self.colors(x)?;
        let conflicts = self
            .graph
            .edges()
            .iter()
            .filter(|e| colors[e.u] == colors[e.v])
            .count();
        Ok(Evaluation::feasible(conflicts as f64))
    }
}
