//! Execution of independent work items: parallel on the rayon pool when the
//! `parallel` feature is enabled, sequential otherwise.
//!
//! Both paths preserve input order, so results are byte-identical regardless
//! of thread count. [`map_seq`] is always available for benchmarking the
//! sequential path against the parallel one.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map over a slice, in parallel when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Map over a slice, in parallel when the `parallel` feature is on.
#[cfg(not(feature = "parallel"))]
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    map_seq(items, f)
}

/// Sequential map, available regardless of features.
pub fn map_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Map over indices `0..n`, in parallel when the `parallel` feature is on.
#[cfg(feature = "parallel")]
pub fn map_indices<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Map over indices `0..n`, in parallel when the `parallel` feature is on.
#[cfg(not(feature = "parallel"))]
pub fn map_indices<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    map_indices_seq(n, f)
}

/// Sequential index map, available regardless of features.
pub fn map_indices_seq<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}
