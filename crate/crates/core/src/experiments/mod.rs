//! Ground-truth engines: exhaustive enumeration of `Ω_n`, seeded Monte Carlo
//! estimation of the rule's success probability, and the count of
//! permutations without successions.

mod enumerate;
mod montecarlo;
mod successions;

pub use enumerate::{
    enumerate_counts, verify_against_exact, Check, EnumerationReport, VerificationReport,
    ENUMERATION_MAX_N,
};
pub use montecarlo::{estimate, sweep, EstimateResult, SweepRow, Tallies, TRIALS_PER_BLOCK};
pub use successions::{a002464_count, A002464_FORCE_MAX_N, A002464_MAX_N};

use crate::error::{Error, Result};

/// Advances `v` to the next permutation in lexicographic order. Returns
/// `false` (leaving `v` sorted ascending) after the last one.
pub fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        v.reverse();
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Runs `f` inside a dedicated pool of `workers` threads.
pub(crate) fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Err(Error::Parameter("worker count must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Default worker count: every available core.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
