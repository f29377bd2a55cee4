//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) index maps run on the rayon global
//! pool; without it they run in order on the calling thread. Results are
//! always collected by index, so the output never depends on the schedule.

/// Evaluates `f(0), …, f(n-1)` and returns the results in index order.
#[cfg(feature = "parallel")]
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Name of the active execution mode, reported by benches and the CLI.
pub fn mode() -> &'static str {
    if cfg!(feature = "parallel") {
        "parallel"
    } else {
        "sequential"
    }
}
