//! Power-balance mismatches evaluated vertex by vertex.
//!
//! Each energized vertex computes the power its incident edges carry away
//! from it, using its own voltage and the voltages of its neighbors, and
//! adds the self term `|V_i|²·G_ii` (or `−|V_i|²·B_ii` for reactive power).

use crate::bsp::{superstep, SweepMode};
use crate::graph::{PowerGraph, ScenarioOverlay};
use crate::ingest::BusType;

use super::{FdpfError, SystemState};

/// Diagonal admittance at `v` with the shielded edge's share removed.
pub(crate) fn self_admittance(
    graph: &PowerGraph,
    overlay: &ScenarioOverlay,
    v: usize,
) -> (f64, f64) {
    let vertex = &graph.vertices[v];
    let (mut g, mut b) = (vertex.g_self, vertex.b_self);
    if let Some(e) = overlay.outaged_edge {
        let edge = &graph.edges[e];
        if edge.from_v == v || edge.to_v == v {
            let (ge, be) = edge.self_admittance(v);
            g -= ge;
            b -= be;
        }
    }
    (g, b)
}

/// Active power flowing out of vertex `i` through its active edges.
fn p_line(graph: &PowerGraph, overlay: &ScenarioOverlay, state: &SystemState, i: usize) -> f64 {
    let vi = state.v_mag[i];
    let mut acc = 0.0;
    for &(e, j) in &graph.adjacency[i] {
        if !overlay.edge_active(graph, e) {
            continue;
        }
        let (g, b) = graph.edges[e].mutual_admittance();
        let theta = state.v_ang[i] - state.v_ang[j];
        acc += state.v_mag[j] * (g * theta.cos() + b * theta.sin());
    }
    vi * acc
}

fn q_line(graph: &PowerGraph, overlay: &ScenarioOverlay, state: &SystemState, i: usize) -> f64 {
    let vi = state.v_mag[i];
    let mut acc = 0.0;
    for &(e, j) in &graph.adjacency[i] {
        if !overlay.edge_active(graph, e) {
            continue;
        }
        let (g, b) = graph.edges[e].mutual_admittance();
        let theta = state.v_ang[i] - state.v_ang[j];
        acc += state.v_mag[j] * (g * theta.sin() - b * theta.cos());
    }
    vi * acc
}

fn check_dim(graph: &PowerGraph, state: &SystemState) -> Result<(), FdpfError> {
    let n = graph.vertex_count();
    for len in [state.v_mag.len(), state.v_ang.len()] {
        if len != n {
            return Err(FdpfError::DimensionMismatch {
                expected: n,
                found: len,
            });
        }
    }
    Ok(())
}

/// `ΔP_i = P_is − P_i-line − |V_i|²·G_ii`; zero at the slack and at
/// deenergized vertices.
pub fn compute_p_mismatch(
    graph: &PowerGraph,
    overlay: &ScenarioOverlay,
    state: &SystemState,
) -> Result<Vec<f64>, FdpfError> {
    p_mismatch_with(graph, overlay, state, SweepMode::Sequential)
}

pub(crate) fn p_mismatch_with(
    graph: &PowerGraph,
    overlay: &ScenarioOverlay,
    state: &SystemState,
    mode: SweepMode,
) -> Result<Vec<f64>, FdpfError> {
    check_dim(graph, state)?;
    let mut out = vec![0.0; graph.vertex_count()];
    superstep(mode, &mut out, |i| {
        if i == graph.slack_index || overlay.is_deenergized(i) {
            return 0.0;
        }
        let (g_ii, _) = self_admittance(graph, overlay, i);
        let vi = state.v_mag[i];
        overlay.p_sched(graph, i) - p_line(graph, overlay, state, i) - vi * vi * g_ii
    });
    Ok(out)
}

/// Reactive counterpart of [`compute_p_mismatch`]; only PQ vertices carry a
/// mismatch.
pub fn compute_q_mismatch(
    graph: &PowerGraph,
    overlay: &ScenarioOverlay,
    state: &SystemState,
) -> Result<Vec<f64>, FdpfError> {
    check_dim(graph, state)?;
    let mut out = vec![0.0; graph.vertex_count()];
    superstep(SweepMode::Sequential, &mut out, |i| {
        if graph.vertices[i].bus_type != BusType::PQ || overlay.is_deenergized(i) {
            return 0.0;
        }
        let (_, b_ii) = self_admittance(graph, overlay, i);
        let vi = state.v_mag[i];
        let q_calc = q_line(graph, overlay, state, i) - vi * vi * b_ii;
        graph.vertices[i].q_sched - q_calc
    });
    Ok(out)
}
