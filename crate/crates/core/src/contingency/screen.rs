use std::time::Instant;

use crate::fdpf::{
    branch_flows, build_bdoubleprime, check_violations, fdpf_solve, FdpfError, LinearBackend,
    PrecondSource,
};
use crate::graph::apply_outage;
use crate::linalg::{lu_factor, LinalgError};
use crate::report::ScreeningReport;

use super::{
    patch_outage_entries, redispatch, round_ms, BaseCaseContext, ContingencyError, PrecondChoice,
    ScenarioResult, ScreenOptions, SolverKind,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScenarioDescriptor {
    pub branch_id: usize,
    pub edge: usize,
    pub from_bus: u32,
    pub to_bus: u32,
}

/// One scenario per in-service branch in ascending branch order, restricted
/// to `filter` when given.
pub fn enumerate_scenarios(
    ctx: &BaseCaseContext,
    filter: Option<&[usize]>,
) -> Result<Vec<ScenarioDescriptor>, ContingencyError> {
    let graph = &ctx.graph;
    if let Some(ids) = filter {
        if let Some(&bad) = ids.iter().find(|&&id| {
            graph
                .edge_of_branch(id)
                .is_none_or(|e| !graph.edges[e].in_service)
        }) {
            return Err(ContingencyError::UnknownBranchInFilter(bad));
        }
    }
    let mut out: Vec<ScenarioDescriptor> = graph
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| e.in_service)
        .filter(|(_, e)| filter.is_none_or(|ids| ids.contains(&e.branch_id)))
        .map(|(i, e)| ScenarioDescriptor {
            branch_id: e.branch_id,
            edge: i,
            from_bus: graph.vertices[e.from_v].bus_id,
            to_bus: graph.vertices[e.to_v].bus_id,
        })
        .collect();
    out.sort_by_key(|d| d.branch_id);
    Ok(out)
}

fn failed(mut r: ScenarioResult, reason: String) -> ScenarioResult {
    r.converged = false;
    r.failure_reason = Some(reason);
    r
}

/// Solves one outage. Failures are recorded in the result, never returned.
pub fn screen_scenario(
    ctx: &BaseCaseContext,
    desc: &ScenarioDescriptor,
    opts: &ScreenOptions,
) -> ScenarioResult {
    let start = Instant::now();
    let mut result = run_scenario(ctx, desc, opts);
    result.time_ms = round_ms(start.elapsed().as_secs_f64() * 1e3);
    result
}

fn run_scenario(
    ctx: &BaseCaseContext,
    desc: &ScenarioDescriptor,
    opts: &ScreenOptions,
) -> ScenarioResult {
    let graph = &ctx.graph;
    let mut result = ScenarioResult {
        branch_id: desc.branch_id,
        from_bus: desc.from_bus,
        to_bus: desc.to_bus,
        islanding: false,
        deenergized_count: 0,
        redispatch: None,
        converged: false,
        outer_iterations: 0,
        cg_iterations_total: 0,
        time_ms: 0.0,
        violation_count: 0,
        violations: Vec::new(),
        violations_overflow: 0,
        failure_reason: None,
    };
    let overlay = match apply_outage(graph, desc.edge) {
        Ok(o) => o,
        Err(e) => return failed(result, format!("graph: {e}")),
    };
    result.islanding = overlay.is_islanding();
    result.deenergized_count = overlay.deenergized.len();
    let initial = &ctx.base_solution.state;

    let overlay = if overlay.is_islanding() {
        match redispatch(ctx, &overlay, opts.major_threshold) {
            Ok((adjusted, record)) => {
                result.redispatch = Some(record);
                adjusted
            }
            Err(_) => return failed(result, "no-participants".into()),
        }
    } else {
        overlay
    };

    let solved = match opts.solver {
        SolverKind::Gpcg => {
            let source = |fixed| match ctx.precond {
                PrecondChoice::Jacobi => PrecondSource::ScenarioJacobi,
                _ => PrecondSource::Fixed(fixed),
            };
            let backend = LinearBackend::Pcg {
                bprime: source(&ctx.base_precond),
                bdoubleprime: source(&ctx.bdp_precond),
            };
            fdpf_solve(graph, &overlay, initial, &opts.fdpf, backend)
        }
        SolverKind::Lud => {
            let bprime = patch_outage_entries(&ctx.bprime_base, graph, &overlay);
            let bp_lu = match lu_factor(&bprime) {
                Ok(f) => f,
                Err(e) => return failed(result, lu_failure(&e)),
            };
            let bdp_lu = match lu_factor(&build_bdoubleprime(graph, &overlay)) {
                Ok(f) => f,
                Err(e) => return failed(result, lu_failure(&e)),
            };
            let backend = LinearBackend::Direct {
                bprime: &bp_lu,
                bdoubleprime: &bdp_lu,
            };
            fdpf_solve(graph, &overlay, initial, &opts.fdpf, backend)
        }
    };

    let solution = match solved {
        Ok(s) => s,
        Err(FdpfError::Diverged { iteration, .. }) => {
            return failed(result, format!("diverged-at-iteration-{iteration}"))
        }
        Err(e) => return failed(result, format!("solver: {e}")),
    };
    result.outer_iterations = solution.outer_iterations;
    result.cg_iterations_total = solution.total_cg_iterations;
    if !solution.converged {
        return failed(result, "max-outer-reached".into());
    }
    result.converged = true;
    let flows = branch_flows(graph, &overlay, &solution.state);
    result.violations = check_violations(&flows, graph);
    result.violation_count = result.violations.len();
    result
}

fn lu_failure(e: &LinalgError) -> String {
    match e {
        LinalgError::Singular { row } | LinalgError::ZeroPivot { row } => {
            format!("lu-failure-singular-row-{row}")
        }
        other => format!("lu-failure: {other}"),
    }
}

/// Screens every scenario selected by `opts.filter` on `workers` threads.
/// Results come back in ascending branch order regardless of scheduling.
pub fn screen_all(
    ctx: &BaseCaseContext,
    opts: &ScreenOptions,
    workers: usize,
) -> Result<ScreeningReport, ContingencyError> {
    let descriptors = enumerate_scenarios(ctx, opts.filter.as_deref())?;
    let start = Instant::now();
    let results = run_all(ctx, opts, &descriptors, workers.max(1));
    let elapsed = round_ms(start.elapsed().as_secs_f64() * 1e3);
    Ok(ScreeningReport::new(ctx, opts, results, elapsed))
}

#[cfg(feature = "parallel")]
fn run_all(
    ctx: &BaseCaseContext,
    opts: &ScreenOptions,
    descriptors: &[ScenarioDescriptor],
    workers: usize,
) -> Vec<ScenarioResult> {
    use rayon::prelude::*;
    if workers > 1 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            return pool.install(|| {
                descriptors
                    .par_iter()
                    .map(|d| screen_scenario(ctx, d, opts))
                    .collect()
            });
        }
    }
    run_sequential(ctx, opts, descriptors)
}

#[cfg(not(feature = "parallel"))]
fn run_all(
    ctx: &BaseCaseContext,
    opts: &ScreenOptions,
    descriptors: &[ScenarioDescriptor],
    _workers: usize,
) -> Vec<ScenarioResult> {
    run_sequential(ctx, opts, descriptors)
}

fn run_sequential(
    ctx: &BaseCaseContext,
    opts: &ScreenOptions,
    descriptors: &[ScenarioDescriptor],
) -> Vec<ScenarioResult> {
    descriptors
        .iter()
        .map(|d| screen_scenario(ctx, d, opts))
        .collect()
}
