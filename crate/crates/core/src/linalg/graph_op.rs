//! B' applied directly on the graph. Diagonal entries live on vertices and
//! off-diagonal entries on edges; each vertex gathers its neighbors' values
//! over its incident edges, then `pᵀAp` is reduced at the barrier.

use crate::bsp::{dot, superstep, SweepMode};
use crate::graph::{PowerGraph, ScenarioOverlay};

use super::{LinalgError, LinearOperator};

/// B' for one scenario: the shielded edge is skipped, its weight is taken
/// off both endpoint diagonals, and the slack and every deenergized vertex
/// carry identity rows.
pub struct GraphBPrime<'a> {
    graph: &'a PowerGraph,
    overlay: &'a ScenarioOverlay,
    identity_row: Vec<bool>,
    diag: Vec<f64>,
    mode: SweepMode,
}

impl<'a> GraphBPrime<'a> {
    pub fn new(graph: &'a PowerGraph, overlay: &'a ScenarioOverlay) -> Self {
        let n = graph.vertex_count();
        let identity_row: Vec<bool> = (0..n)
            .map(|v| v == graph.slack_index || overlay.is_deenergized(v))
            .collect();
        let mut diag: Vec<f64> = graph.vertices.iter().map(|v| v.bprime_diag).collect();
        if let Some(e) = overlay.outaged_edge {
            let edge = &graph.edges[e];
            diag[edge.from_v] -= edge.bprime_weight();
            diag[edge.to_v] -= edge.bprime_weight();
        }
        for (d, &id) in diag.iter_mut().zip(&identity_row) {
            if id {
                *d = 1.0;
            }
        }
        Self {
            graph,
            overlay,
            identity_row,
            diag,
            mode: SweepMode::Sequential,
        }
    }

    pub fn with_mode(mut self, mode: SweepMode) -> Self {
        self.mode = mode;
        self
    }

    /// Effective diagonal for this scenario (what a Jacobi sweep divides by).
    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    fn row_value(&self, s: usize, p: &[f64]) -> f64 {
        if self.identity_row[s] {
            return p[s];
        }
        let mut acc = self.diag[s] * p[s];
        for &(e, t) in &self.graph.adjacency[s] {
            if self.overlay.is_shielded(e)
                || self.identity_row[t]
                || !self.graph.edges[e].in_service
            {
                continue;
            }
            acc += self.graph.edges[e].bprime_off * p[t];
        }
        acc
    }
}

impl LinearOperator for GraphBPrime<'_> {
    fn dim(&self) -> usize {
        self.graph.vertex_count()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        superstep(self.mode, y, |s| self.row_value(s, x));
    }

    fn apply_energy(&self, x: &[f64], y: &mut [f64]) -> f64 {
        self.apply(x, y);
        dot(x, y)
    }
}

/// One graph-form SpMV: returns `A·p` and `pᵀA·p`.
pub fn spmv_graph(
    graph: &PowerGraph,
    overlay: &ScenarioOverlay,
    p: &[f64],
) -> Result<(Vec<f64>, f64), LinalgError> {
    let op = GraphBPrime::new(graph, overlay);
    if p.len() != op.dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: op.dim(),
            found: p.len(),
        });
    }
    let mut ap = vec![0.0; p.len()];
    let pap = op.apply_energy(p, &mut ap);
    Ok((ap, pap))
}
