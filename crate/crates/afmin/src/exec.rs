//! Sample-sweep execution.
//!
//! Property sweeps and inequality monitors evaluate a pure function over
//! many independent samples. With the `parallel` feature (on by default)
//! [`try_map`] fans the work out over rayon; without it the call is plain
//! sequential iteration. Results come back in input order either way, so
//! downstream reductions are deterministic.
//!
//! [`try_map_seq`] is always sequential and exists so benchmarks can compare
//! the two paths in one build.

use crate::error::Result;

#[cfg(feature = "parallel")]
pub fn try_map<T, U, F>(items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Send + Sync,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn try_map<T, U, F>(items: &[T], f: F) -> Result<Vec<U>>
where
    F: Fn(&T) -> Result<U>,
{
    try_map_seq(items, f)
}

/// Sequential reference path for [`try_map`].
pub fn try_map_seq<T, U, F>(items: &[T], f: F) -> Result<Vec<U>>
where
    F: Fn(&T) -> Result<U>,
{
    items.iter().map(&f).collect()
}
