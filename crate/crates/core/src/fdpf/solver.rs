use crate::bsp::norm_inf;
use crate::graph::{PowerGraph, ScenarioOverlay};
use crate::ingest::BusType;
use crate::linalg::{
    jacobi_preconditioner, lu_solve, pcg_solve, CgOptions, GraphBPrime, LinearOperator, LuFactors,
    Preconditioner, SparseMatrix,
};

use super::matrices::build_bdoubleprime;
use super::mismatch::{compute_q_mismatch, p_mismatch_with};
use super::{FdpfError, FdpfMode, FdpfOptions, PowerFlowSolution, SystemState};

/// Where a PCG half-iteration gets its preconditioner.
#[derive(Clone, Copy, Debug)]
pub enum PrecondSource<'a> {
    /// A preconditioner built ahead of time, typically from the base case.
    Fixed(&'a Preconditioner),
    /// Diagonal scaling by the current scenario's own matrix.
    ScenarioJacobi,
}

/// How the two half-iteration systems are solved.
#[derive(Clone, Copy, Debug)]
pub enum LinearBackend<'a> {
    Pcg {
        bprime: PrecondSource<'a>,
        bdoubleprime: PrecondSource<'a>,
    },
    /// Forward/backward substitution with factors of this scenario's
    /// matrices.
    Direct {
        bprime: &'a LuFactors,
        bdoubleprime: &'a LuFactors,
    },
}

/// One P-θ half-iteration: the right-hand side `ΔP/|V|` and the step taken.
#[derive(Clone, Debug, PartialEq)]
pub struct PStep {
    pub rhs: Vec<f64>,
    pub dtheta: Vec<f64>,
    pub cg_iterations: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FdpfTrace {
    pub p_steps: Vec<PStep>,
}

pub fn fdpf_solve(
    graph: &PowerGraph,
    overlay: &ScenarioOverlay,
    initial: &SystemState,
    opts: &FdpfOptions,
    backend: LinearBackend<'_>,
) -> Result<PowerFlowSolution, FdpfError> {
    solve(graph, overlay, initial, opts, backend, None)
}

/// Same as [`fdpf_solve`], recording every P-θ step.
pub fn fdpf_solve_traced(
    graph: &PowerGraph,
    overlay: &ScenarioOverlay,
    initial: &SystemState,
    opts: &FdpfOptions,
    backend: LinearBackend<'_>,
    trace: &mut FdpfTrace,
) -> Result<PowerFlowSolution, FdpfError> {
    solve(graph, overlay, initial, opts, backend, Some(trace))
}

struct HalfSolver<'a> {
    op: &'a dyn LinearOperator,
    precond: Option<Preconditioner>,
    fixed: Option<&'a Preconditioner>,
    direct: Option<&'a LuFactors>,
    cg: CgOptions,
}

impl HalfSolver<'_> {
    /// Returns the step and the CG iterations it took.
    fn solve(&self, rhs: &[f64]) -> Result<(Vec<f64>, usize), FdpfError> {
        if let Some(factors) = self.direct {
            return Ok((lu_solve(factors, rhs)?, 0));
        }
        let precond = self
            .fixed
            .or(self.precond.as_ref())
            .expect("pcg half-solver has a preconditioner");
        let x0 = vec![0.0; rhs.len()];
        let report = pcg_solve(self.op, rhs, &x0, precond, self.cg)?;
        Ok((report.solution, report.iterations))
    }
}

fn solve(
    graph: &PowerGraph,
    overlay: &ScenarioOverlay,
    initial: &SystemState,
    opts: &FdpfOptions,
    backend: LinearBackend<'_>,
    mut trace: Option<&mut FdpfTrace>,
) -> Result<PowerFlowSolution, FdpfError> {
    let n = graph.vertex_count();
    for len in [initial.v_mag.len(), initial.v_ang.len()] {
        if len != n {
            return Err(FdpfError::DimensionMismatch {
                expected: n,
                found: len,
            });
        }
    }
    let full = opts.mode == FdpfMode::Full;
    let cg = CgOptions {
        tol: opts.cg_tol,
        max_iter: opts.cg_max_iter.unwrap_or(2 * n.max(1)),
    };

    let mut state = initial.clone();
    for &v in &overlay.deenergized {
        state.v_mag[v] = 1.0;
        state.v_ang[v] = 0.0;
    }
    // Identity rows of B' and B'' hold these entries; roundoff from an
    // inexact solve must not move them.
    let mut angle_fixed = vec![false; n];
    let mut mag_fixed = vec![false; n];
    for v in 0..n {
        let dead = overlay.is_deenergized(v);
        angle_fixed[v] = dead || v == graph.slack_index;
        mag_fixed[v] = dead || graph.vertices[v].bus_type != BusType::PQ;
    }

    let bprime_op = GraphBPrime::new(graph, overlay);
    let bpp: Option<SparseMatrix> = match backend {
        LinearBackend::Pcg { .. } if full => Some(build_bdoubleprime(graph, overlay)),
        _ => None,
    };
    let identity = SparseMatrix::identity(0);

    let (p_half, q_half) = match backend {
        LinearBackend::Pcg {
            bprime,
            bdoubleprime,
        } => {
            let p_half = HalfSolver {
                op: &bprime_op,
                precond: match bprime {
                    PrecondSource::Fixed(_) => None,
                    PrecondSource::ScenarioJacobi => Some(Preconditioner::from_diagonal(
                        bprime_op.diagonal().to_vec(),
                    )?),
                },
                fixed: match bprime {
                    PrecondSource::Fixed(m) => Some(m),
                    PrecondSource::ScenarioJacobi => None,
                },
                direct: None,
                cg,
            };
            let q_op: &dyn LinearOperator = bpp.as_ref().unwrap_or(&identity);
            let q_half = HalfSolver {
                op: q_op,
                precond: match (bdoubleprime, &bpp) {
                    (PrecondSource::ScenarioJacobi, Some(m)) => Some(jacobi_preconditioner(m)?),
                    _ => None,
                },
                fixed: match bdoubleprime {
                    PrecondSource::Fixed(m) => Some(m),
                    PrecondSource::ScenarioJacobi => None,
                },
                direct: None,
                cg,
            };
            (p_half, q_half)
        }
        LinearBackend::Direct {
            bprime,
            bdoubleprime,
        } => (
            HalfSolver {
                op: &bprime_op,
                precond: None,
                fixed: None,
                direct: Some(bprime),
                cg,
            },
            HalfSolver {
                op: &identity,
                precond: None,
                fixed: None,
                direct: Some(bdoubleprime),
                cg,
            },
        ),
    };

    let mut best = f64::INFINITY;
    let mut outer = 0;
    let mut total_cg = 0;
    let mut max_cg = 0;
    loop {
        let dp = p_mismatch_with(graph, overlay, &state, crate::bsp::SweepMode::Sequential)?;
        let dq = compute_q_mismatch(graph, overlay, &state)?;
        let max_p = norm_inf(&dp);
        let max_q = norm_inf(&dq);
        let worst = if full { max_p.max(max_q) } else { max_p };

        let finish = |converged: bool, state: SystemState| PowerFlowSolution {
            state,
            converged,
            outer_iterations: outer,
            total_cg_iterations: total_cg,
            max_cg_iterations: max_cg,
            max_p_mismatch: max_p,
            max_q_mismatch: max_q,
        };

        if worst <= opts.mismatch_tol {
            return Ok(finish(true, state));
        }
        if !worst.is_finite() || worst > 10.0 * best {
            return Err(FdpfError::Diverged {
                iteration: outer,
                mismatch: worst,
            });
        }
        best = best.min(worst);
        if outer >= opts.max_outer {
            return Ok(finish(false, state));
        }
        outer += 1;

        let rhs: Vec<f64> = dp.iter().zip(&state.v_mag).map(|(p, v)| p / v).collect();
        let (dtheta, iters) = p_half.solve(&rhs)?;
        total_cg += iters;
        max_cg = max_cg.max(iters);
        for ((theta, d), &fixed) in state.v_ang.iter_mut().zip(&dtheta).zip(&angle_fixed) {
            if !fixed {
                *theta += d;
            }
        }
        if let Some(t) = trace.as_deref_mut() {
            t.p_steps.push(PStep {
                rhs,
                dtheta,
                cg_iterations: iters,
            });
        }

        if full {
            let dq = compute_q_mismatch(graph, overlay, &state)?;
            let rhs: Vec<f64> = dq.iter().zip(&state.v_mag).map(|(q, v)| q / v).collect();
            let (dv, iters) = q_half.solve(&rhs)?;
            total_cg += iters;
            max_cg = max_cg.max(iters);
            for ((v, d), &fixed) in state.v_mag.iter_mut().zip(&dv).zip(&mag_fixed) {
                if !fixed {
                    *v += d;
                }
            }
        }
    }
}
