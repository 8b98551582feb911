use crate::bsp::{dot, norm2};

use super::{LinalgError, LinearOperator, Preconditioner};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOptions {
    /// Relative residual target: stop when `‖r‖₂ ≤ tol·‖b‖₂`.
    pub tol: f64,
    pub max_iter: usize,
}

impl CgOptions {
    /// Default tolerance with an iteration cap of twice the dimension.
    pub fn for_dim(n: usize) -> Self {
        Self {
            tol: 1e-8,
            max_iter: 2 * n.max(1),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    /// `‖b − A·x‖₂` recomputed from the returned solution.
    pub final_residual_norm: f64,
    pub converged: bool,
    pub solution: Vec<f64>,
}

pub fn pcg_solve(
    op: &dyn LinearOperator,
    b: &[f64],
    x0: &[f64],
    precond: &Preconditioner,
    opts: CgOptions,
) -> Result<CgReport, LinalgError> {
    pcg_solve_observed(op, b, x0, precond, opts, &mut |_, _| {})
}

/// Preconditioned conjugate gradient. `observe(k, x_k)` is called after every
/// solution update.
pub fn pcg_solve_observed(
    op: &dyn LinearOperator,
    b: &[f64],
    x0: &[f64],
    precond: &Preconditioner,
    opts: CgOptions,
    observe: &mut dyn FnMut(usize, &[f64]),
) -> Result<CgReport, LinalgError> {
    let n = op.dim();
    for len in [b.len(), x0.len(), precond.dim()] {
        if len != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                found: len,
            });
        }
    }

    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(CgReport {
            iterations: 0,
            final_residual_norm: 0.0,
            converged: true,
            solution: vec![0.0; n],
        });
    }
    let target = opts.tol * b_norm;

    let mut x = x0.to_vec();
    let mut ap = vec![0.0; n];
    let mut r = b.to_vec();
    if x.iter().any(|&v| v != 0.0) {
        op.apply(&x, &mut ap);
        for (ri, a) in r.iter_mut().zip(&ap) {
            *ri -= a;
        }
    }
    if norm2(&r) <= target {
        return Ok(CgReport {
            iterations: 0,
            final_residual_norm: norm2(&r),
            converged: true,
            solution: x,
        });
    }

    let mut z = vec![0.0; n];
    precond.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let pap = op.apply_energy(&p, &mut ap);
        if !(pap > 0.0) {
            return Err(LinalgError::Breakdown {
                iteration: iterations,
                pap,
            });
        }
        // step length
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        observe(iterations, &x);

        if norm2(&r) <= target && true_residual(op, b, &x, &mut ap) <= target {
            converged = true;
            break;
        }

        precond.apply(&r, &mut z);
        let rz_next = dot(&z, &r);
        // improvement
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    let final_residual_norm = true_residual(op, b, &x, &mut ap);
    Ok(CgReport {
        iterations,
        final_residual_norm,
        converged: converged || final_residual_norm <= target,
        solution: x,
    })
}

fn true_residual(op: &dyn LinearOperator, b: &[f64], x: &[f64], scratch: &mut [f64]) -> f64 {
    op.apply(x, scratch);
    b.iter()
        .zip(scratch.iter())
        .map(|(bi, ai)| (bi - ai) * (bi - ai))
        .sum::<f64>()
        .sqrt()
}
