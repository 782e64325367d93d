//! Data-parallel driving of independent candidate checks.
//!
//! With the `parallel` feature (on by default) the helpers fan work out over
//! rayon and merge results in input order, so callers stay deterministic.
//! Batches below a size threshold run sequentially either way — at desk
//! scale the per-candidate cost is microseconds and thread handoff would
//! dominate. Without the feature the helpers degrade to plain sequential
//! iteration. Benchmarks can force the sequential path at runtime via
//! [`force_sequential`] to compare both in one run.

#[cfg(feature = "parallel")]
use std::sync::atomic::{AtomicBool, Ordering};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Candidate-mask counts below this stay sequential.
#[cfg(feature = "parallel")]
const MIN_PARALLEL_RANGE: u64 = 4096;

/// Item batches below this stay sequential.
#[cfg(feature = "parallel")]
const MIN_PARALLEL_ITEMS: usize = 64;

#[cfg(feature = "parallel")]
static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Forces the sequential code path even when the `parallel` feature is
/// enabled. Intended for benchmarks comparing the two.
#[cfg(feature = "parallel")]
pub fn force_sequential(yes: bool) {
    FORCE_SEQUENTIAL.store(yes, Ordering::Relaxed);
}

#[cfg(not(feature = "parallel"))]
pub fn force_sequential(_yes: bool) {}

#[cfg(feature = "parallel")]
fn forced_sequential() -> bool {
    FORCE_SEQUENTIAL.load(Ordering::Relaxed)
}

/// Applies `f` to every index in `0..count`, keeping the `Some` results in
/// index order and stopping at the first error.
#[cfg(feature = "parallel")]
pub fn try_filter_map_range<T, E, F>(count: u64, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64) -> Result<Option<T>, E> + Sync,
{
    if count < MIN_PARALLEL_RANGE || forced_sequential() {
        return try_filter_map_range_seq(count, f);
    }
    (0..count)
        .into_par_iter()
        .filter_map(|i| f(i).transpose())
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn try_filter_map_range<T, E, F>(count: u64, f: F) -> Result<Vec<T>, E>
where
    F: Fn(u64) -> Result<Option<T>, E>,
{
    try_filter_map_range_seq(count, f)
}

fn try_filter_map_range_seq<T, E, F>(count: u64, f: F) -> Result<Vec<T>, E>
where
    F: Fn(u64) -> Result<Option<T>, E>,
{
    let mut out = Vec::new();
    for i in 0..count {
        if let Some(v) = f(i)? {
            out.push(v);
        }
    }
    Ok(out)
}

/// Maps `f` over the items, preserving order and stopping at the first
/// error.
#[cfg(feature = "parallel")]
pub fn try_map_vec<I, T, E, F>(items: Vec<I>, f: F) -> Result<Vec<T>, E>
where
    I: Send,
    T: Send,
    E: Send,
    F: Fn(I) -> Result<T, E> + Sync + Send,
{
    if items.len() < MIN_PARALLEL_ITEMS || forced_sequential() {
        return items.into_iter().map(f).collect();
    }
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn try_map_vec<I, T, E, F>(items: Vec<I>, f: F) -> Result<Vec<T>, E>
where
    F: Fn(I) -> Result<T, E>,
{
    items.into_iter().map(f).collect()
}
