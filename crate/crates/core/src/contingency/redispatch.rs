use serde::{Deserialize, Serialize};

use crate::graph::ScenarioOverlay;

use super::{BaseCaseContext, ContingencyError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Participant {
    pub bus_id: u32,
    pub vertex: usize,
    pub share: f64,
    /// Change in scheduled injection, p.u.
    pub delta_p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RedispatchRecord {
    /// Net scheduled injection the island took with it, p.u.
    pub island_net_injection: f64,
    pub participants: Vec<Participant>,
    pub island_gen_count: usize,
    pub island_load_count: usize,
}

/// Spreads the island's net injection over main-island generators above
/// `threshold` in proportion to their output, so total scheduled injection
/// over energized buses equals the pre-outage total.
pub fn redispatch(
    ctx: &BaseCaseContext,
    overlay: &ScenarioOverlay,
    threshold: f64,
) -> Result<(ScenarioOverlay, RedispatchRecord), ContingencyError> {
    let graph = &ctx.graph;
    let island = &overlay.deenergized;
    let net: f64 = island.iter().map(|&v| overlay.p_sched(graph, v)).sum();
    let island_gen_count = island
        .iter()
        .filter(|&&v| graph.vertices[v].p_gen > 0.0)
        .count();
    let island_load_count = island
        .iter()
        .filter(|&&v| graph.vertices[v].p_load > 0.0)
        .count();

    let majors: Vec<usize> = (0..graph.vertex_count())
        .filter(|&v| !overlay.is_deenergized(v) && graph.vertices[v].p_gen > threshold)
        .collect();
    let capacity: f64 = majors.iter().map(|&v| graph.vertices[v].p_gen).sum();
    if majors.is_empty() || !(capacity > 0.0) {
        return Err(ContingencyError::NoParticipants(net));
    }

    let mut adjusted = overlay.clone();
    let participants = majors
        .iter()
        .map(|&v| {
            let share = graph.vertices[v].p_gen / capacity;
            let delta_p = net * share;
            adjusted
                .adjusted_p_sched
                .insert(v, overlay.p_sched(graph, v) + delta_p);
            Participant {
                bus_id: graph.vertices[v].bus_id,
                vertex: v,
                share,
                delta_p,
            }
        })
        .collect();

    Ok((
        adjusted,
        RedispatchRecord {
            island_net_injection: net,
            participants,
            island_gen_count,
            island_load_count,
        },
    ))
}
