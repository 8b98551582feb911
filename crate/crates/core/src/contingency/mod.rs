//! N-1 screening: one scenario per in-service branch, all solved against a
//! single shared base case.
//!
//! The base case is solved once and B' of the base case is factorized once.
//! Every scenario starts its power flow from the base-case voltages and
//! preconditions its PCG solves with those base-case factors, even though
//! its own B' differs in up to four entries (plus identity rows for any
//! deenergized island).

mod context;
mod patch;
mod redispatch;
mod screen;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fdpf::{FdpfError, Violation};
use crate::ingest::Diagnostic;

pub use context::{prepare_base, BaseCaseContext};
pub use patch::{patch_matrix, patch_outage_entries};
pub use redispatch::{redispatch, Participant, RedispatchRecord};
pub use screen::{enumerate_scenarios, screen_all, screen_scenario, ScenarioDescriptor};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContingencyError {
    #[error("model has {} validation error(s); first: {}", .0.len(), .0.first().map(|d| d.to_string()).unwrap_or_default())]
    InvalidModel(Vec<Diagnostic>),
    #[error("base case did not converge: {0}")]
    BaseCaseDiverged(String),
    #[error("branch {0} in filter is not an in-service branch")]
    UnknownBranchInFilter(usize),
    #[error("main island has no generator to take up the island's {0:.4} p.u.")]
    NoParticipants(f64),
}

impl From<FdpfError> for ContingencyError {
    fn from(e: FdpfError) -> Self {
        ContingencyError::BaseCaseDiverged(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    /// Graph-form PCG with base-case preconditioning.
    #[default]
    Gpcg,
    /// Per-scenario LU refactorization with no reuse.
    Lud,
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolverKind::Gpcg => "gpcg",
            SolverKind::Lud => "lud",
        })
    }
}

/// Preconditioner used by the scenario PCG solves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PrecondChoice {
    None,
    /// Each scenario's own diagonal.
    Jacobi,
    /// ILU(0) factors of the base-case matrix.
    Ilu0Base,
    /// Complete LU factors of the base-case matrix.
    #[default]
    LuBase,
}

impl std::fmt::Display for PrecondChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PrecondChoice::None => "none",
            PrecondChoice::Jacobi => "jacobi",
            PrecondChoice::Ilu0Base => "ilu0-base",
            PrecondChoice::LuBase => "lu-base",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScreenOptions {
    pub solver: SolverKind,
    pub precond: PrecondChoice,
    pub fdpf: crate::fdpf::FdpfOptions,
    /// Generators above this output (p.u.) take part in re-dispatch.
    pub major_threshold: f64,
    /// Branch ids to screen; `None` screens every in-service branch.
    pub filter: Option<Vec<usize>>,
}

impl Default for ScreenOptions {
    fn default() -> Self {
        Self {
            solver: SolverKind::Gpcg,
            precond: PrecondChoice::LuBase,
            fdpf: Default::default(),
            major_threshold: 0.0,
            filter: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub branch_id: usize,
    pub from_bus: u32,
    pub to_bus: u32,
    pub islanding: bool,
    pub deenergized_count: usize,
    pub redispatch: Option<RedispatchRecord>,
    pub converged: bool,
    pub outer_iterations: usize,
    pub cg_iterations_total: usize,
    pub time_ms: f64,
    pub violation_count: usize,
    pub violations: Vec<Violation>,
    /// Violations left out of `violations` by the output cap.
    #[serde(default)]
    pub violations_overflow: usize,
    pub failure_reason: Option<String>,
}

impl ScenarioResult {
    pub fn worst_violation_pct(&self) -> Option<f64> {
        self.violations.first().map(|v| v.percent)
    }
}

/// Rounds a duration to the 0.01 ms resolution reports carry.
pub(crate) fn round_ms(ms: f64) -> f64 {
    (ms * 100.0).round() / 100.0
}
