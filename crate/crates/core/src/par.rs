//! Data-parallel helpers. With the `parallel` feature these fan out over the
//! rayon pool; without it they run the same closures sequentially. Results are
//! returned in input order either way, so callers stay schedule-independent.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// True when the crate was built with the rayon backend.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(feature = "parallel")]
pub(crate) fn map_slice<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_slice<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub(crate) fn map_range<R, F>(range: Range<u64>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> R + Sync + Send,
{
    range.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_range<R, F>(range: Range<u64>, f: F) -> Vec<R>
where
    F: Fn(u64) -> R,
{
    range.map(f).collect()
}

/// First index in `range` (in index order) for which `f` yields `Some`.
#[cfg(feature = "parallel")]
pub(crate) fn find_first<R, F>(range: Range<u64>, f: F) -> Option<R>
where
    R: Send,
    F: Fn(u64) -> Option<R> + Sync + Send,
{
    range.into_par_iter().map(f).find_first(Option::is_some).flatten()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn find_first<R, F>(range: Range<u64>, f: F) -> Option<R>
where
    F: Fn(u64) -> Option<R>,
{
    range.map(f).find(Option::is_some).flatten()
}
