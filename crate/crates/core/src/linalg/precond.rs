use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::lu::{ilu0, LuFactors, TriangularFactors};
use super::{LinalgError, SparseMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PreconditionerKind {
    Identity,
    Jacobi,
    Ilu0,
    FullLu,
}

impl fmt::Display for PreconditionerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PreconditionerKind::Identity => "identity",
            PreconditionerKind::Jacobi => "jacobi",
            PreconditionerKind::Ilu0 => "ilu0",
            PreconditionerKind::FullLu => "full-lu",
        })
    }
}

impl FromStr for PreconditionerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identity" | "none" => Ok(Self::Identity),
            "jacobi" => Ok(Self::Jacobi),
            "ilu0" => Ok(Self::Ilu0),
            "full-lu" | "lu" => Ok(Self::FullLu),
            other => Err(format!("unknown preconditioner {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Payload {
    None,
    Diagonal(Vec<f64>),
    Factors(TriangularFactors),
}

/// The operator `M⁻¹` applied once per PCG iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct Preconditioner {
    kind: PreconditionerKind,
    n: usize,
    payload: Payload,
}

impl Preconditioner {
    pub fn identity(n: usize) -> Self {
        Self {
            kind: PreconditionerKind::Identity,
            n,
            payload: Payload::None,
        }
    }

    pub fn from_lu(factors: LuFactors) -> Self {
        Self {
            kind: PreconditionerKind::FullLu,
            n: factors.0.dim(),
            payload: Payload::Factors(factors.0),
        }
    }

    /// Builds the requested kind from `a`.
    pub fn build(kind: PreconditionerKind, a: &SparseMatrix) -> Result<Self, LinalgError> {
        match kind {
            PreconditionerKind::Identity => Ok(Self::identity(a.dim())),
            PreconditionerKind::Jacobi => jacobi_preconditioner(a),
            PreconditionerKind::Ilu0 => ilu0_factor(a),
            PreconditionerKind::FullLu => super::lu_factor(a).map(Self::from_lu),
        }
    }

    pub fn kind(&self) -> PreconditionerKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `z = M⁻¹ r`.
    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        debug_assert_eq!(r.len(), self.n);
        match &self.payload {
            Payload::None => z.copy_from_slice(r),
            Payload::Diagonal(d) => {
                for ((zi, ri), di) in z.iter_mut().zip(r).zip(d) {
                    *zi = ri / di;
                }
            }
            Payload::Factors(f) => {
                z.copy_from_slice(r);
                f.solve_in_place(z);
            }
        }
    }
}

impl Preconditioner {
    /// Jacobi scaling by an explicit diagonal.
    pub fn from_diagonal(diag: Vec<f64>) -> Result<Self, LinalgError> {
        if let Some(row) = diag.iter().position(|&d| d == 0.0 || !d.is_finite()) {
            return Err(LinalgError::ZeroPivot { row });
        }
        Ok(Self {
            kind: PreconditionerKind::Jacobi,
            n: diag.len(),
            payload: Payload::Diagonal(diag),
        })
    }
}

/// Diagonal scaling `z_i = r_i / A_ii`.
pub fn jacobi_preconditioner(a: &SparseMatrix) -> Result<Preconditioner, LinalgError> {
    Preconditioner::from_diagonal(a.diagonal())
}

/// Incomplete LU restricted to the sparsity pattern of `a`.
pub fn ilu0_factor(a: &SparseMatrix) -> Result<Preconditioner, LinalgError> {
    Ok(Preconditioner {
        kind: PreconditionerKind::Ilu0,
        n: a.dim(),
        payload: Payload::Factors(ilu0(a)?),
    })
}
