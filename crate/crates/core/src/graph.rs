//! Vertex/edge model of the network.
//!
//! Each bus is a vertex carrying its own state and diagonal admittance terms;
//! each in-service branch is an edge carrying its series admittance and its
//! off-diagonal B' entry. The base graph is never mutated: an outage is a
//! [`ScenarioOverlay`] that shields one edge and marks the vertices cut off
//! from the slack bus.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::ingest::{BusType, NetworkModel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex index {0} out of range")]
    VertexOutOfRange(usize),
    #[error("edge index {0} out of range")]
    EdgeOutOfRange(usize),
    #[error("edge {0} is already out of service")]
    EdgeAlreadyOut(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VertexAttrs {
    pub bus_id: u32,
    pub bus_type: BusType,
    pub v_mag: f64,
    pub v_ang: f64,
    pub p_sched: f64,
    pub q_sched: f64,
    pub p_gen: f64,
    pub p_load: f64,
    pub g_shunt: f64,
    pub b_shunt: f64,
    /// Diagonal of the bus admittance matrix, G_ii and B_ii.
    pub g_self: f64,
    pub b_self: f64,
    /// Diagonal of B' before the slack row is replaced.
    pub bprime_diag: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeAttrs {
    pub branch_id: usize,
    pub from_v: usize,
    pub to_v: usize,
    /// Series admittance `1 / (r + jx)`.
    pub g_series: f64,
    pub b_series: f64,
    pub b_charging_half: f64,
    pub tap: f64,
    pub x: f64,
    /// Flow limit in p.u.; 0 means unlimited.
    pub rating: f64,
    pub in_service: bool,
    pub bprime_off: f64,
}

impl EdgeAttrs {
    /// Contribution of this edge to the admittance diagonal at `v`.
    pub fn self_admittance(&self, v: usize) -> (f64, f64) {
        if v == self.from_v {
            let t2 = self.tap * self.tap;
            (
                self.g_series / t2,
                self.b_series / t2 + self.b_charging_half,
            )
        } else {
            (self.g_series, self.b_series + self.b_charging_half)
        }
    }

    /// Off-diagonal admittance entry (G_ij, B_ij); symmetric without phase
    /// shifters.
    pub fn mutual_admittance(&self) -> (f64, f64) {
        (-self.g_series / self.tap, -self.b_series / self.tap)
    }

    pub fn other(&self, v: usize) -> usize {
        if v == self.from_v {
            self.to_v
        } else {
            self.from_v
        }
    }

    /// `1/x` stencil weight used by B'.
    pub fn bprime_weight(&self) -> f64 {
        1.0 / self.x
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerGraph {
    pub case_name: String,
    pub base_mva: f64,
    pub vertices: Vec<VertexAttrs>,
    pub edges: Vec<EdgeAttrs>,
    /// Per vertex: (edge index, neighbor index), ascending by neighbor.
    pub adjacency: Vec<Vec<(usize, usize)>>,
    pub slack_index: usize,
    #[serde(skip)]
    index_map: HashMap<u32, usize>,
    #[serde(skip)]
    edge_by_branch: HashMap<usize, usize>,
}

/// Builds the graph from a validated model: one vertex per bus, one edge
/// per in-service branch.
pub fn build_graph(model: &NetworkModel) -> PowerGraph {
    let index_map: HashMap<u32, usize> = model
        .buses
        .iter()
        .enumerate()
        .map(|(i, b)| (b.id, i))
        .collect();

    let mut vertices: Vec<VertexAttrs> = model
        .buses
        .iter()
        .map(|b| VertexAttrs {
            bus_id: b.id,
            bus_type: b.bus_type,
            v_mag: b.v_mag,
            v_ang: b.v_ang,
            p_sched: b.p_sched(),
            q_sched: b.q_sched(),
            p_gen: b.p_gen,
            p_load: b.p_load,
            g_shunt: b.g_shunt,
            b_shunt: b.b_shunt,
            g_self: b.g_shunt,
            b_self: b.b_shunt,
            bprime_diag: 0.0,
        })
        .collect();

    let mut edges = Vec::new();
    let mut edge_by_branch = HashMap::new();
    for br in model.branches.iter().filter(|b| b.in_service) {
        let z2 = br.r * br.r + br.x * br.x;
        let edge = EdgeAttrs {
            branch_id: br.id,
            from_v: index_map[&br.from_bus],
            to_v: index_map[&br.to_bus],
            g_series: br.r / z2,
            b_series: -br.x / z2,
            b_charging_half: br.b_charging / 2.0,
            tap: br.tap,
            x: br.x,
            rating: br.rating_mva / model.base_mva,
            in_service: true,
            bprime_off: -1.0 / br.x,
        };
        edge_by_branch.insert(br.id, edges.len());
        edges.push(edge);
    }

    let mut adjacency = vec![Vec::new(); vertices.len()];
    for (e, edge) in edges.iter().enumerate() {
        for v in [edge.from_v, edge.to_v] {
            let (g, b) = edge.self_admittance(v);
            vertices[v].g_self += g;
            vertices[v].b_self += b;
            vertices[v].bprime_diag += edge.bprime_weight();
            adjacency[v].push((e, edge.other(v)));
        }
    }
    for list in &mut adjacency {
        list.sort_by_key(|&(e, t)| (t, e));
    }

    let slack_index = vertices
        .iter()
        .position(|v| v.bus_type == BusType::Slack)
        .expect("validated model has a slack bus");

    PowerGraph {
        case_name: model.case_name.clone(),
        base_mva: model.base_mva,
        vertices,
        edges,
        adjacency,
        slack_index,
        index_map,
        edge_by_branch,
    }
}

impl PowerGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_of_bus(&self, bus_id: u32) -> Option<usize> {
        self.index_map.get(&bus_id).copied()
    }

    pub fn edge_of_branch(&self, branch_id: usize) -> Option<usize> {
        self.edge_by_branch.get(&branch_id).copied()
    }

    pub fn neighbors(&self, v: usize) -> Result<&[(usize, usize)], GraphError> {
        self.adjacency
            .get(v)
            .map(Vec::as_slice)
            .ok_or(GraphError::VertexOutOfRange(v))
    }

    /// Vertex attributes and edge list as pretty JSON, for debugging.
    pub fn dump_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }
}

/// Maximal connected vertex sets. `main` is the label of the component
/// holding the slack vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub labels: Vec<usize>,
    pub components: Vec<Vec<usize>>,
    pub main: usize,
}

impl Partition {
    pub fn is_connected(&self) -> bool {
        self.components.len() == 1
    }

    /// Vertices outside the main component, ascending.
    pub fn outside_main(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .components
            .iter()
            .enumerate()
            .filter(|&(c, _)| c != self.main)
            .flat_map(|(_, vs)| vs.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }
}

/// Breadth-first component labelling that ignores `excluded` edges and
/// out-of-service edges. Uses an explicit queue, so deep radial feeders do
/// not recurse.
pub fn connected_components(graph: &PowerGraph, excluded: &[usize]) -> Partition {
    let n = graph.vertex_count();
    let mut skip = vec![false; graph.edge_count()];
    for &e in excluded {
        if let Some(s) = skip.get_mut(e) {
            *s = true;
        }
    }

    const UNSEEN: usize = usize::MAX;
    let mut labels = vec![UNSEEN; n];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for root in 0..n {
        if labels[root] != UNSEEN {
            continue;
        }
        let label = components.len();
        let mut members = vec![root];
        labels[root] = label;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            for &(e, t) in &graph.adjacency[v] {
                if skip[e] || !graph.edges[e].in_service || labels[t] != UNSEEN {
                    continue;
                }
                labels[t] = label;
                members.push(t);
                queue.push_back(t);
            }
        }
        members.sort_unstable();
        components.push(members);
    }

    let main = labels[graph.slack_index];
    Partition {
        labels,
        components,
        main,
    }
}

/// One outage scenario layered over the shared base graph.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioOverlay {
    /// `None` for the base case.
    pub outaged_edge: Option<usize>,
    /// Vertices cut off from the slack bus, ascending.
    pub deenergized: Vec<usize>,
    deenergized_mask: Vec<bool>,
    /// Scheduled active injection after re-dispatch, for adjusted vertices.
    pub adjusted_p_sched: BTreeMap<usize, f64>,
}

impl ScenarioOverlay {
    pub fn base(graph: &PowerGraph) -> Self {
        Self {
            outaged_edge: None,
            deenergized: Vec::new(),
            deenergized_mask: vec![false; graph.vertex_count()],
            adjusted_p_sched: BTreeMap::new(),
        }
    }

    pub fn is_shielded(&self, e: usize) -> bool {
        self.outaged_edge == Some(e)
    }

    pub fn is_deenergized(&self, v: usize) -> bool {
        self.deenergized_mask[v]
    }

    pub fn is_islanding(&self) -> bool {
        !self.deenergized.is_empty()
    }

    pub fn p_sched(&self, graph: &PowerGraph, v: usize) -> f64 {
        self.adjusted_p_sched
            .get(&v)
            .copied()
            .unwrap_or(graph.vertices[v].p_sched)
    }

    /// Whether edge `e` carries flow in this scenario.
    pub fn edge_active(&self, graph: &PowerGraph, e: usize) -> bool {
        let edge = &graph.edges[e];
        edge.in_service
            && !self.is_shielded(e)
            && !self.deenergized_mask[edge.from_v]
            && !self.deenergized_mask[edge.to_v]
    }
}

/// Removes one edge and marks every vertex no longer connected to the slack
/// bus. Re-dispatch is left to the caller.
pub fn apply_outage(graph: &PowerGraph, edge: usize) -> Result<ScenarioOverlay, GraphError> {
    let attrs = graph
        .edges
        .get(edge)
        .ok_or(GraphError::EdgeOutOfRange(edge))?;
    if !attrs.in_service {
        return Err(GraphError::EdgeAlreadyOut(edge));
    }
    let partition = connected_components(graph, &[edge]);
    let deenergized = partition.outside_main();
    let mut mask = vec![false; graph.vertex_count()];
    for &v in &deenergized {
        mask[v] = true;
    }
    Ok(ScenarioOverlay {
        outaged_edge: Some(edge),
        deenergized,
        deenergized_mask: mask,
        adjusted_p_sched: BTreeMap::new(),
    })
}
