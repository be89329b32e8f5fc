//! Fixed-chunk execution helpers.
//!
//! Row reductions run over fixed-size chunks whose partial results are
//! combined in index order, so the `parallel` build and the sequential
//! fallback produce bitwise-identical floating-point results.

use std::ops::Range;

/// Rows per work unit. Fixed so chunk boundaries do not depend on the
/// thread count or the machine.
pub(crate) const ROW_CHUNK: usize = 1024;

/// Splits `0..n` into `ROW_CHUNK`-sized ranges, applies `f` to each, and
/// returns the results in chunk order.
#[cfg(feature = "parallel")]
pub(crate) fn map_chunks<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(Range<usize>) -> R + Sync + Send,
{
    use rayon::prelude::*;
    let chunks = n.div_ceil(ROW_CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| f(c * ROW_CHUNK..((c + 1) * ROW_CHUNK).min(n)))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_chunks<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(Range<usize>) -> R + Sync + Send,
{
    let chunks = n.div_ceil(ROW_CHUNK);
    (0..chunks)
        .map(|c| f(c * ROW_CHUNK..((c + 1) * ROW_CHUNK).min(n)))
        .collect()
}

/// Applies `f` to every index in `0..n` and collects results in index
/// order. Used for independent work items (sketch columns, replications,
/// grid cells) that carry their own derived seeds.
#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).map(f).collect()
}
