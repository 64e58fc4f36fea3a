//! Execution strategy for batches of independent work items.
//!
//! Sweep points are embarrassingly parallel: each point's own arithmetic is
//! strictly sequential (fixed quadrature node order, fixed reduction
//! order), so distributing *items* across threads cannot change any
//! computed bit. [`map_auto`] uses the rayon thread pool when the
//! `parallel` feature (on by default) is enabled and degrades to
//! [`map_sequential`] otherwise; both return results in input order, and
//! both produce byte-identical output for the same input.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items` one at a time, in order.
pub fn map_sequential<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Map `f` over `items` using the rayon thread pool; results are collected
/// in input order regardless of completion order.
#[cfg(feature = "parallel")]
pub fn map_auto<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Sequential fallback used when the `parallel` feature is disabled.
#[cfg(not(feature = "parallel"))]
pub fn map_auto<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    map_sequential(items, f)
}
