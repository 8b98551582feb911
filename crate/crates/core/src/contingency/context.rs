use std::time::Instant;

use crate::fdpf::{
    build_bdoubleprime, build_bprime, fdpf_solve, LinearBackend, PowerFlowSolution, PrecondSource,
    SystemState,
};
use crate::graph::{build_graph, PowerGraph, ScenarioOverlay};
use crate::ingest::{validate_network, NetworkModel};
use crate::linalg::{Preconditioner, PreconditionerKind, SparseMatrix};

use super::{round_ms, ContingencyError, PrecondChoice, ScreenOptions, SolverKind};

/// Everything scenarios share. Immutable once built.
#[derive(Clone, Debug)]
pub struct BaseCaseContext {
    pub graph: PowerGraph,
    pub base_solution: PowerFlowSolution,
    pub bprime_base: SparseMatrix,
    pub base_precond: Preconditioner,
    pub bdp_base: SparseMatrix,
    pub bdp_precond: Preconditioner,
    pub precond: PrecondChoice,
    /// Factorizations of the base-case B' performed while preparing.
    pub bprime_factorizations: usize,
    pub base_time_ms: f64,
}

fn kind_for(solver: SolverKind, choice: PrecondChoice) -> PreconditionerKind {
    match (solver, choice) {
        (SolverKind::Lud, _) | (_, PrecondChoice::LuBase) => PreconditionerKind::FullLu,
        (_, PrecondChoice::None) => PreconditionerKind::Identity,
        (_, PrecondChoice::Jacobi) => PreconditionerKind::Jacobi,
        (_, PrecondChoice::Ilu0Base) => PreconditionerKind::Ilu0,
    }
}

/// Builds the graph, factorizes the base-case matrices and solves the base
/// case from a flat start.
pub fn prepare_base(
    model: &NetworkModel,
    opts: &ScreenOptions,
) -> Result<BaseCaseContext, ContingencyError> {
    let errors: Vec<_> = validate_network(model)
        .into_iter()
        .filter(|d| d.is_error())
        .collect();
    if !errors.is_empty() {
        return Err(ContingencyError::InvalidModel(errors));
    }

    let start = Instant::now();
    let graph = build_graph(model);
    let base = ScenarioOverlay::base(&graph);
    let bprime_base = build_bprime(&graph, &base);
    let bdp_base = build_bdoubleprime(&graph, &base);

    let kind = kind_for(opts.solver, opts.precond);
    let factorizes = matches!(kind, PreconditionerKind::Ilu0 | PreconditionerKind::FullLu);
    let precond_err =
        |e| ContingencyError::BaseCaseDiverged(format!("base-case factorization: {e}"));
    let base_precond = Preconditioner::build(kind, &bprime_base).map_err(precond_err)?;
    let bdp_precond = Preconditioner::build(kind, &bdp_base).map_err(precond_err)?;

    let backend = LinearBackend::Pcg {
        bprime: PrecondSource::Fixed(&base_precond),
        bdoubleprime: PrecondSource::Fixed(&bdp_precond),
    };
    let base_solution = fdpf_solve(
        &graph,
        &base,
        &SystemState::flat(&graph),
        &opts.fdpf,
        backend,
    )?;
    if !base_solution.converged {
        return Err(ContingencyError::BaseCaseDiverged(format!(
            "no convergence in {} outer iterations (max mismatch {:.3e} p.u.)",
            base_solution.outer_iterations,
            base_solution
                .max_p_mismatch
                .max(base_solution.max_q_mismatch)
        )));
    }

    Ok(BaseCaseContext {
        graph,
        base_solution,
        bprime_base,
        base_precond,
        bdp_base,
        bdp_precond,
        precond: opts.precond,
        bprime_factorizations: usize::from(factorizes),
        base_time_ms: round_ms(start.elapsed().as_secs_f64() * 1e3),
    })
}
