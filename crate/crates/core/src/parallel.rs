//! Worker pools sized by `DEGENKERNEL_THREADS`.

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "DEGENKERNEL_THREADS";

/// Worker count: the explicit request, else `DEGENKERNEL_THREADS`, else
/// rayon's default.
pub fn worker_count(requested: Option<usize>) -> usize {
    requested
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse().ok()))
        .filter(|&n| n > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

/// Runs `f` inside a pool with [`worker_count`] threads.
pub fn install<T, F>(requested: Option<usize>, f: F) -> T
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    match rayon::ThreadPoolBuilder::new().num_threads(worker_count(requested)).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
