//! Data-parallel helpers.
//!
//! With the `parallel` feature (default) these dispatch to rayon; without it
//! they run the same closures sequentially. Every helper preserves input
//! order in its output, and reductions combine fixed-size chunk partials in
//! chunk order, so results are bit-identical across thread counts and across
//! the two builds.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Rows per chunk for chunked reductions. Part of the numeric contract: the
/// floating-point summation tree depends on it.
pub const REDUCE_CHUNK: usize = 1024;

/// `(0..n).map(f).collect()`, in parallel when enabled.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// `items.iter().map(f).collect()`, in parallel when enabled.
pub fn map_slice<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Maps every `REDUCE_CHUNK`-sized range of `0..n` to a partial result, then
/// folds the partials left to right with `combine`.
pub fn chunked_reduce<T, F, C>(n: usize, init: T, partial: F, combine: C) -> T
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
    C: Fn(T, T) -> T,
{
    let chunks = n.div_ceil(REDUCE_CHUNK);
    let partials = map_range(chunks, |c| {
        let start = c * REDUCE_CHUNK;
        partial(start..(start + REDUCE_CHUNK).min(n))
    });
    partials.into_iter().fold(init, combine)
}

/// Whether this build dispatches to rayon.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
