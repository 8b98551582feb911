//! Assembly of the constant fast-decoupled matrices (XB scheme).
//!
//! B' uses only the `1/x` branch stencil. B'' is the negated imaginary part
//! of the bus admittance matrix, so it keeps resistance, taps, charging and
//! shunts. Rows that do not take part in a half-iteration are identity rows.

use crate::graph::{PowerGraph, ScenarioOverlay};
use crate::ingest::BusType;
use crate::linalg::SparseMatrix;

use super::mismatch::self_admittance;

/// B' for the given scenario, assembled edge by edge.
pub fn build_bprime(graph: &PowerGraph, overlay: &ScenarioOverlay) -> SparseMatrix {
    let n = graph.vertex_count();
    let fixed = |v: usize| v == graph.slack_index || overlay.is_deenergized(v);
    let mut diag = vec![0.0; n];
    let mut triplets = Vec::new();
    for (e, edge) in graph.edges.iter().enumerate() {
        if !edge.in_service || overlay.is_shielded(e) {
            continue;
        }
        let w = edge.bprime_weight();
        let (i, j) = (edge.from_v, edge.to_v);
        diag[i] += w;
        diag[j] += w;
        if !fixed(i) && !fixed(j) {
            triplets.push((i, j, -w));
            triplets.push((j, i, -w));
        }
    }
    for (v, d) in diag.into_iter().enumerate() {
        triplets.push((v, v, if fixed(v) { 1.0 } else { d }));
    }
    SparseMatrix::from_triplets(n, &triplets)
}

/// B'' for the given scenario. Identity rows for the slack, PV and
/// deenergized vertices.
pub fn build_bdoubleprime(graph: &PowerGraph, overlay: &ScenarioOverlay) -> SparseMatrix {
    assemble_bdoubleprime(graph, overlay).0
}

/// B'' together with the largest `|B_ij − B_ji|` seen before symmetrizing.
pub fn assemble_bdoubleprime(graph: &PowerGraph, overlay: &ScenarioOverlay) -> (SparseMatrix, f64) {
    let n = graph.vertex_count();
    let fixed = |v: usize| graph.vertices[v].bus_type != BusType::PQ || overlay.is_deenergized(v);
    let mut triplets = Vec::new();
    for (e, edge) in graph.edges.iter().enumerate() {
        if !overlay.edge_active(graph, e) {
            continue;
        }
        let (i, j) = (edge.from_v, edge.to_v);
        if fixed(i) || fixed(j) {
            continue;
        }
        let (_, b_ij) = edge.mutual_admittance();
        triplets.push((i, j, -b_ij));
        triplets.push((j, i, -b_ij));
    }
    for v in 0..n {
        let value = if fixed(v) {
            1.0
        } else {
            -self_admittance(graph, overlay, v).1
        };
        triplets.push((v, v, value));
    }
    let raw = SparseMatrix::from_triplets(n, &triplets);
    let asymmetry = raw.asymmetry();
    if asymmetry == 0.0 {
        return (raw, 0.0);
    }
    let symmetric: Vec<(usize, usize, f64)> = raw
        .triplets()
        .into_iter()
        .map(|(i, j, v)| (i, j, 0.5 * (v + raw.get(j, i))))
        .collect();
    (SparseMatrix::from_triplets(n, &symmetric), asymmetry)
}
