//! Index-parallel execution with a sequential fallback.
//!
//! All Monte Carlo loops are expressed as functions of a trial index, with
//! randomness derived from the index (see [`crate::rng`]). That makes the
//! results independent of scheduling, so running on rayon or sequentially is
//! purely a throughput decision. Compiling without the `parallel` feature
//! removes rayon entirely; `jobs == 1` forces the sequential path at runtime.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Thread-count request for a parallel region. `0` means "rayon default".
pub type Jobs = usize;

#[cfg(feature = "parallel")]
fn run_in_pool<T: Send>(jobs: Jobs, op: impl FnOnce() -> T + Send) -> T {
    match jobs {
        0 => op(),
        n => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("failed to build thread pool")
            .install(op),
    }
}

/// Maps `f` over `0..n`, preserving index order in the output.
pub fn map_indexed<T, F>(jobs: Jobs, n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    {
        if jobs != 1 {
            return run_in_pool(jobs, || (0..n).into_par_iter().map(&f).collect());
        }
    }
    let _ = jobs;
    (0..n).map(f).collect()
}

/// Counts indices in `0..n` satisfying `pred`. Exact under any schedule
/// (integer addition is commutative and associative).
pub fn count_indexed<F>(jobs: Jobs, n: u64, pred: F) -> u64
where
    F: Fn(u64) -> bool + Sync,
{
    #[cfg(feature = "parallel")]
    {
        if jobs != 1 {
            return run_in_pool(jobs, || {
                (0..n).into_par_iter().map(|i| pred(i) as u64).sum()
            });
        }
    }
    let _ = jobs;
    (0..n).map(|i| pred(i) as u64).sum()
}
