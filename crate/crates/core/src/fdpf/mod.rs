//! Fast-decoupled power flow over the power graph.

mod flows;
mod matrices;
mod mismatch;
mod solver;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::PowerGraph;
use crate::ingest::BusType;
use crate::linalg::LinalgError;

pub use flows::{branch_flows, check_violations, BranchFlow, Violation};
pub use matrices::{assemble_bdoubleprime, build_bdoubleprime, build_bprime};
pub use mismatch::{compute_p_mismatch, compute_q_mismatch};
pub use solver::{fdpf_solve, fdpf_solve_traced, FdpfTrace, LinearBackend, PStep, PrecondSource};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FdpfError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("diverged at outer iteration {iteration}: mismatch {mismatch:.3e} p.u.")]
    Diverged { iteration: usize, mismatch: f64 },
    #[error(transparent)]
    Solver(#[from] LinalgError),
}

/// Bus voltage magnitudes (p.u.) and angles (rad), indexed by vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub v_mag: Vec<f64>,
    pub v_ang: Vec<f64>,
}

impl SystemState {
    /// Flat start: unit magnitude and zero angle everywhere except the
    /// setpoints of PV and slack buses and the slack reference angle.
    pub fn flat(graph: &PowerGraph) -> Self {
        let v_mag = graph
            .vertices
            .iter()
            .map(|v| match v.bus_type {
                BusType::PQ => 1.0,
                BusType::PV | BusType::Slack => v.v_mag,
            })
            .collect();
        let mut v_ang = vec![0.0; graph.vertex_count()];
        v_ang[graph.slack_index] = graph.vertices[graph.slack_index].v_ang;
        Self { v_mag, v_ang }
    }

    /// The voltages recorded in the input case.
    pub fn recorded(graph: &PowerGraph) -> Self {
        Self {
            v_mag: graph.vertices.iter().map(|v| v.v_mag).collect(),
            v_ang: graph.vertices.iter().map(|v| v.v_ang).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FdpfMode {
    /// Alternating P-θ and Q-V half-iterations.
    Full,
    /// P-θ half-iterations only, voltage magnitudes held.
    QuickPTheta,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdpfOptions {
    pub mismatch_tol: f64,
    pub max_outer: usize,
    pub mode: FdpfMode,
    pub cg_tol: f64,
    /// Per-solve CG iteration cap; `None` means twice the bus count.
    pub cg_max_iter: Option<usize>,
}

impl Default for FdpfOptions {
    fn default() -> Self {
        Self {
            mismatch_tol: 1e-3,
            max_outer: 50,
            mode: FdpfMode::Full,
            cg_tol: 1e-8,
            cg_max_iter: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerFlowSolution {
    pub state: SystemState,
    pub converged: bool,
    /// P-θ half-iterations performed.
    pub outer_iterations: usize,
    pub total_cg_iterations: usize,
    /// Largest iteration count of any single inner solve.
    pub max_cg_iterations: usize,
    pub max_p_mismatch: f64,
    pub max_q_mismatch: f64,
}
