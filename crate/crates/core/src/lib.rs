//! N-1 contingency screening of transmission networks.
//!
//! Networks are read from IEEE Common Data Format or JSON, turned into a
//! vertex/edge graph, and every single-branch outage is solved with a
//! fast-decoupled power flow whose linear systems go through a graph-form
//! preconditioned conjugate gradient solver. The base-case B' is factorized
//! once and reused as the preconditioner for every outage.

pub mod bsp;
pub mod contingency;
pub mod fdpf;
pub mod graph;
pub mod ingest;
pub mod linalg;
pub mod report;

pub use contingency::{
    prepare_base, screen_all, BaseCaseContext, ContingencyError, PrecondChoice, ScenarioResult,
    ScreenOptions, SolverKind,
};
pub use report::ScreeningReport;
