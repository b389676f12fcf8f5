//! Index-parallel map used by every replicate/trial loop.
//!
//! With the `parallel` feature the work is spread over the rayon pool,
//! otherwise it runs on the calling thread. Output order is always index
//! order, and each index must derive its randomness from its own substream,
//! so both builds produce identical results.

use crate::error::Result;

#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Like [`map_indexed`] but fallible; the reported error is the one with the
/// lowest index, independent of scheduling.
pub fn try_map_indexed<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    map_indexed(n, f).into_iter().collect()
}

/// Splits `0..n` into fixed-size chunks, folds each chunk sequentially and
/// returns the per-chunk results in order. Chunk boundaries do not depend on
/// the thread count, so an ordered reduction over the result is reproducible.
pub fn fold_chunks<T, F>(n: usize, chunk: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
{
    let chunk = chunk.max(1);
    let chunks = n.div_ceil(chunk);
    map_indexed(chunks, |c| f(c * chunk..((c + 1) * chunk).min(n)))
}
