//! Deterministic parallel execution: every task is a pure function of its
//! index, and results are collected in index order, so output is invariant
//! to the worker count.

use anyhow::Result;
use rayon::prelude::*;

/// Worker count: explicit flag, then RMLAB_WORKERS, then all cores.
pub fn resolve_workers(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("RMLAB_WORKERS")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .filter(|&w| w > 0)
    .unwrap_or_else(num_threads_default)
}

fn num_threads_default() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

pub fn run_indexed<T, F>(workers: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()?;
    Ok(pool.install(|| (0..count as u64).into_par_iter().map(&f).collect()))
}
