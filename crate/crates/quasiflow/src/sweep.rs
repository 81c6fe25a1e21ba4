//! Concurrent threshold searches over κ.

use quasiflow_core::bifurcation::{self, BisectOptions, Setup, SweepEntry};
use rayon::prelude::*;

/// Environment variable capping the worker count.
pub const THREADS_VAR: &str = "QUASIFLOW_THREADS";

/// Worker count: available parallelism, capped by `QUASIFLOW_THREADS` when
/// it holds a positive integer.
pub fn worker_count(jobs: usize) -> usize {
    let available = std::thread::available_parallelism().map_or(1, usize::from);
    let cap = std::env::var(THREADS_VAR)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(available);
    cap.min(available).min(jobs).max(1)
}

/// Same as [`bifurcation::kappa_sweep`] with the bisections run on a worker
/// pool. Entries come back in the order of `kappas`.
pub fn parallel_kappa_sweep(
    setup: &Setup,
    kappas: &[f64],
    bracket: (f64, f64),
    options: &BisectOptions,
    threads: usize,
) -> Vec<SweepEntry> {
    let run = || {
        kappas
            .par_iter()
            .map(|&kappa| SweepEntry {
                kappa,
                result: bifurcation::sweep_params(setup, kappa)
                    .and_then(|s| bifurcation::bisect_lambda(&s, bracket, options)),
            })
            .collect()
    };
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(run),
        Err(_) => bifurcation::kappa_sweep(setup, kappas, bracket, options),
    }
}
