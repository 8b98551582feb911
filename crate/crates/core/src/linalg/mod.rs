//! Sparse storage, factorizations, preconditioners and the PCG solver.

mod graph_op;
mod lu;
mod pcg;
mod precond;
mod sparse;

use thiserror::Error;

pub use graph_op::{spmv_graph, GraphBPrime};
pub use lu::{
    factorization_count, lu_factor, lu_solve, LuFactors, TriangularFactors, PIVOT_THRESHOLD,
};
pub use pcg::{pcg_solve, pcg_solve_observed, CgOptions, CgReport};
pub use precond::{ilu0_factor, jacobi_preconditioner, Preconditioner, PreconditionerKind};
pub use sparse::{spmv_csr, SparseMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is singular at pivot row {row}")]
    Singular { row: usize },
    #[error("zero pivot at row {row}")]
    ZeroPivot { row: usize },
    #[error("CG breakdown at iteration {iteration}: pᵀAp = {pap:e}")]
    Breakdown { iteration: usize, pap: f64 },
}

/// A square linear map `y = A·x`.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// `y = A·x`, returning `xᵀA·x`.
    fn apply_energy(&self, x: &[f64], y: &mut [f64]) -> f64 {
        self.apply(x, y);
        crate::bsp::dot(x, y)
    }
}
