//! Execution facade for the data-parallel inner loops (all-pairs connectivity
//! tables, per-edge preservation scans, multi-seed sweeps).
//!
//! With the `parallel` feature (the default) these run on rayon unless
//! sequential mode is forced at runtime, which the benchmarks use to compare
//! both paths in one binary. Without the feature the sequential code is the
//! only path compiled.

use std::sync::atomic::{AtomicBool, Ordering};

static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Forces the sequential path even when the `parallel` feature is compiled in.
pub fn set_sequential(force: bool) {
    FORCE_SEQUENTIAL.store(force, Ordering::Relaxed);
}

pub fn is_sequential() -> bool {
    if cfg!(feature = "parallel") {
        FORCE_SEQUENTIAL.load(Ordering::Relaxed)
    } else {
        true
    }
}

#[cfg(feature = "parallel")]
pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Send + Sync,
{
    use rayon::prelude::*;
    if is_sequential() {
        items.iter().map(f).collect()
    } else {
        items.par_iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn any<T, F>(items: &[T], f: F) -> bool
where
    T: Sync,
    F: Fn(&T) -> bool + Send + Sync,
{
    use rayon::prelude::*;
    if is_sequential() {
        items.iter().any(f)
    } else {
        items.par_iter().any(&f)
    }
}

#[cfg(not(feature = "parallel"))]
pub fn any<T, F>(items: &[T], f: F) -> bool
where
    F: Fn(&T) -> bool,
{
    items.iter().any(f)
}
