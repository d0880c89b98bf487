//! Sequential/parallel dispatch helpers.
//!
//! Every data-parallel kernel in the crate is written against these two
//! functions. The parallel path maps in deterministic order (collect, then
//! fold sequentially), so enabling the `parallel` feature never changes a
//! single bit of any result.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, collecting results in index order.
pub(crate) fn map_indexed<R, F>(n: usize, parallel: bool, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = parallel;
    (0..n).map(f).collect()
}

/// Map `f` over `0..n` and sum the results left to right.
///
/// The summation order is fixed regardless of thread count.
pub(crate) fn sum_indexed<F>(n: usize, parallel: bool, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_indexed(n, parallel, f).iter().sum()
}

/// Whether the parallel feature is compiled in.
pub(crate) fn parallel_available() -> bool {
    cfg!(feature = "parallel")
}
