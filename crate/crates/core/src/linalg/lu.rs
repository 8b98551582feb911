//! Row-oriented LU factorization without pivoting, complete or restricted to
//! the sparsity pattern of the input (ILU(0)).

use std::cell::Cell;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{LinalgError, SparseMatrix};

/// Relative threshold below which a pivot counts as zero.
pub const PIVOT_THRESHOLD: f64 = 1e-10;

thread_local! {
    static FACTORIZATIONS: Cell<usize> = const { Cell::new(0) };
}

/// Number of LU/ILU factorizations performed on the calling thread so far.
pub fn factorization_count() -> usize {
    FACTORIZATIONS.with(Cell::get)
}

/// `L` (unit lower, diagonal not stored) and `U` (upper, diagonal stored
/// separately) in row-compressed form.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangularFactors {
    n: usize,
    lower: Vec<Vec<(usize, f64)>>,
    upper: Vec<Vec<(usize, f64)>>,
    pivots: Vec<f64>,
}

/// Complete factors of a matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LuFactors(pub(crate) TriangularFactors);

#[derive(Clone, Copy, PartialEq, Eq)]
enum Fill {
    Complete,
    PatternOnly,
}

impl TriangularFactors {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn pivots(&self) -> &[f64] {
        &self.pivots
    }

    /// Stored entries in L and U, diagonal included.
    pub fn nnz(&self) -> usize {
        self.n
            + self.lower.iter().map(Vec::len).sum::<usize>()
            + self.upper.iter().map(Vec::len).sum::<usize>()
    }

    /// Forward substitution with `L`, then backward with `U`, in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        for i in 0..self.n {
            let mut acc = x[i];
            for &(k, l) in &self.lower[i] {
                acc -= l * x[k];
            }
            x[i] = acc;
        }
        for i in (0..self.n).rev() {
            let mut acc = x[i];
            for &(j, u) in &self.upper[i] {
                acc -= u * x[j];
            }
            x[i] = acc / self.pivots[i];
        }
    }
}

fn factor(a: &SparseMatrix, fill: Fill) -> Result<TriangularFactors, LinalgError> {
    FACTORIZATIONS.with(|c| c.set(c.get() + 1));
    let n = a.dim();
    let threshold = PIVOT_THRESHOLD * a.max_abs();
    let mut lower: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    let mut upper: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    let mut pivots = Vec::with_capacity(n);

    let mut work = vec![0.0; n];
    let mut present = vec![false; n];
    let mut pattern: Vec<usize> = Vec::new();
    let mut pending: BinaryHeap<Reverse<usize>> = BinaryHeap::new();

    for i in 0..n {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            work[j] = v;
            present[j] = true;
            pattern.push(j);
            if j < i {
                pending.push(Reverse(j));
            }
        }
        if !present[i] {
            present[i] = true;
            pattern.push(i);
        }

        let mut lrow = Vec::new();
        while let Some(Reverse(k)) = pending.pop() {
            let factor = work[k] / pivots[k];
            work[k] = factor;
            lrow.push((k, factor));
            for &(j, u) in &upper[k] {
                if !present[j] {
                    if fill == Fill::PatternOnly {
                        continue;
                    }
                    present[j] = true;
                    pattern.push(j);
                    work[j] = 0.0;
                    if j < i {
                        pending.push(Reverse(j));
                    }
                }
                work[j] -= factor * u;
            }
        }

        let pivot = work[i];
        if !(pivot.abs() > threshold) {
            for &j in &pattern {
                present[j] = false;
                work[j] = 0.0;
            }
            return Err(match fill {
                Fill::Complete => LinalgError::Singular { row: i },
                Fill::PatternOnly => LinalgError::ZeroPivot { row: i },
            });
        }
        pivots.push(pivot);

        let mut urow: Vec<(usize, f64)> = pattern
            .iter()
            .filter(|&&j| j > i)
            .map(|&j| (j, work[j]))
            .collect();
        urow.sort_unstable_by_key(|&(j, _)| j);
        lower.push(lrow);
        upper.push(urow);

        for &j in &pattern {
            present[j] = false;
            work[j] = 0.0;
        }
        pattern.clear();
    }

    Ok(TriangularFactors {
        n,
        lower,
        upper,
        pivots,
    })
}

/// Complete LU factorization with diagonal pivots only. A pivot smaller than
/// `1e-10·max|A|` is reported as [`LinalgError::Singular`].
pub fn lu_factor(a: &SparseMatrix) -> Result<LuFactors, LinalgError> {
    factor(a, Fill::Complete).map(LuFactors)
}

pub fn lu_solve(factors: &LuFactors, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if b.len() != factors.0.n {
        return Err(LinalgError::DimensionMismatch {
            expected: factors.0.n,
            found: b.len(),
        });
    }
    let mut x = b.to_vec();
    factors.0.solve_in_place(&mut x);
    Ok(x)
}

impl LuFactors {
    pub fn factors(&self) -> &TriangularFactors {
        &self.0
    }
}

/// Incomplete factors restricted to the pattern of `a`.
pub(crate) fn ilu0(a: &SparseMatrix) -> Result<TriangularFactors, LinalgError> {
    factor(a, Fill::PatternOnly)
}
