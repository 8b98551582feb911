//! Pi-model branch flows and limit checks.

use serde::{Deserialize, Serialize};

use crate::graph::{PowerGraph, ScenarioOverlay};

use super::SystemState;

/// Sending- and receiving-end flows of one edge, in p.u.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BranchFlow {
    pub p_from: f64,
    pub q_from: f64,
    pub p_to: f64,
    pub q_to: f64,
}

impl BranchFlow {
    /// Larger of the two end active flows in magnitude.
    pub fn loading(&self) -> f64 {
        self.p_from.abs().max(self.p_to.abs())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub branch_id: usize,
    pub flow_pu: f64,
    pub limit_pu: f64,
    pub percent: f64,
}

/// Flows on every edge; the shielded edge and edges touching deenergized
/// vertices carry zero.
pub fn branch_flows(
    graph: &PowerGraph,
    overlay: &ScenarioOverlay,
    state: &SystemState,
) -> Vec<BranchFlow> {
    graph
        .edges
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            if !overlay.edge_active(graph, e) {
                return BranchFlow::default();
            }
            let (f, t) = (edge.from_v, edge.to_v);
            let (vf, vt) = (state.v_mag[f], state.v_mag[t]);
            let (g, b, tap) = (edge.g_series, edge.b_series, edge.tap);
            let bc = edge.b_charging_half;
            let theta_ft = state.v_ang[f] - state.v_ang[t];
            let (s, c) = theta_ft.sin_cos();
            let cross = vf * vt / tap;
            BranchFlow {
                p_from: vf * vf * g / (tap * tap) - cross * (g * c + b * s),
                q_from: -vf * vf * (b / (tap * tap) + bc) - cross * (g * s - b * c),
                p_to: vt * vt * g - cross * (g * c - b * s),
                q_to: -vt * vt * (b + bc) + cross * (g * s + b * c),
            }
        })
        .collect()
}

/// Every rated edge whose loading exceeds its rating, worst first.
pub fn check_violations(flows: &[BranchFlow], graph: &PowerGraph) -> Vec<Violation> {
    let mut out: Vec<Violation> = graph
        .edges
        .iter()
        .zip(flows)
        .filter(|(edge, _)| edge.in_service && edge.rating > 0.0)
        .filter_map(|(edge, flow)| {
            let loading = flow.loading();
            (loading > edge.rating).then(|| Violation {
                branch_id: edge.branch_id,
                flow_pu: loading,
                limit_pu: edge.rating,
                percent: 100.0 * loading / edge.rating,
            })
        })
        .collect();
    out.sort_by(|a, b| {
        b.percent
            .total_cmp(&a.percent)
            .then(a.branch_id.cmp(&b.branch_id))
    });
    out
}
