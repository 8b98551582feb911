//! Vertex superstep execution.
//!
//! A superstep runs one compute function per vertex. Every vertex reads only
//! values produced before the step began and writes only its own output slot,
//! so the result is independent of how vertices are scheduled. Global
//! reductions happen after the sweep, at the barrier.

/// How a vertex sweep is scheduled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SweepMode {
    /// Ascending vertex order on the calling thread.
    #[default]
    Sequential,
    /// Vertices spread over the rayon pool. Without the `parallel` feature
    /// this is the same as `Sequential`.
    Parallel,
}

/// Runs `compute` for every vertex and stores the result in `out[v]`.
pub fn superstep<F>(mode: SweepMode, out: &mut [f64], compute: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    match mode {
        SweepMode::Sequential => {
            for (v, slot) in out.iter_mut().enumerate() {
                *slot = compute(v);
            }
        }
        SweepMode::Parallel => parallel_superstep(out, compute),
    }
}

#[cfg(feature = "parallel")]
fn parallel_superstep<F>(out: &mut [f64], compute: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    use rayon::prelude::*;
    out.par_iter_mut()
        .enumerate()
        .with_min_len(64)
        .for_each(|(v, slot)| *slot = compute(v));
}

#[cfg(not(feature = "parallel"))]
fn parallel_superstep<F>(out: &mut [f64], compute: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    for (v, slot) in out.iter_mut().enumerate() {
        *slot = compute(v);
    }
}

/// Dot product in ascending index order. This is the barrier reduction used
/// everywhere a deterministic global scalar is needed.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}
