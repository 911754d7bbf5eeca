//! Order-stable parallel reductions.
//!
//! Work is split into fixed-size chunks that do not depend on the size of
//! the thread pool, and the per-chunk partials are combined sequentially.
//! Results are therefore bit-identical for any worker count.

use num_complex::Complex64;
use rayon::prelude::*;

pub(crate) const CHUNK: usize = 2048;

pub fn sum_f64<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let partials: Vec<f64> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let end = ((c + 1) * CHUNK).min(len);
            (c * CHUNK..end).map(&f).sum::<f64>()
        })
        .collect();
    partials.into_iter().sum()
}

pub fn sum_c64<F>(len: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    let partials: Vec<Complex64> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let end = ((c + 1) * CHUNK).min(len);
            (c * CHUNK..end).map(&f).sum::<Complex64>()
        })
        .collect();
    partials.into_iter().sum()
}

/// Evaluates `f` at every index in parallel, preserving order.
pub fn map<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..len).into_par_iter().map(f).collect()
}

/// First index attaining the maximum of `f`; ties resolve to the lowest index.
pub fn argmax(values: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some((_, b)) if !(v > b) => {}
            _ => best = Some((i, v)),
        }
    }
    best
}
