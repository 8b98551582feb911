use crate::graph::{PowerGraph, ScenarioOverlay};
use crate::linalg::SparseMatrix;

/// B' of one outage scenario derived from the base-case B'.
///
/// Removing a branch of reactance `x` between `i` and `j` touches exactly
/// four entries: both diagonals drop by `1/x` and both off-diagonals rise by
/// `1/x`. Entries in the slack row and column are identity entries and stay
/// untouched. Deenergized vertices then become identity rows.
pub fn patch_matrix(
    bprime_base: &SparseMatrix,
    graph: &PowerGraph,
    overlay: &ScenarioOverlay,
) -> SparseMatrix {
    let mut patched = patch_outage_entries(bprime_base, graph, overlay);
    for &v in &overlay.deenergized {
        patched.make_identity_row(v);
    }
    patched
}

/// The four-entry patch alone, leaving any island as it falls out. For an
/// islanding outage the result is singular.
pub fn patch_outage_entries(
    bprime_base: &SparseMatrix,
    graph: &PowerGraph,
    overlay: &ScenarioOverlay,
) -> SparseMatrix {
    let mut patched = bprime_base.clone();
    let Some(e) = overlay.outaged_edge else {
        return patched;
    };
    let edge = &graph.edges[e];
    let w = edge.bprime_weight();
    let (i, j) = (edge.from_v, edge.to_v);
    let slack = graph.slack_index;
    let mut bump = |r: usize, c: usize, delta: f64| {
        let k = patched
            .position(r, c)
            .expect("outaged edge is in the base pattern");
        patched.values_mut()[k] += delta;
    };
    if i != slack {
        bump(i, i, -w);
    }
    if j != slack {
        bump(j, j, -w);
    }
    if i != slack && j != slack {
        bump(i, j, w);
        bump(j, i, w);
    }
    patched
}
