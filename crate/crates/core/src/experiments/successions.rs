//! Permutations of `1..=n` with no succession: no two consecutive positions
//! hold ranks differing by exactly one (the pair `{1, n}` is not a
//! succession here).

use crate::error::{Error, Result};
use crate::exact::ExactCount;

/// Largest `n` counted without `force`.
pub const A002464_MAX_N: usize = 13;
/// Hard limit with `force`: the table holds `2^n · n` 64-bit entries.
pub const A002464_FORCE_MAX_N: usize = 20;

/// Counts succession-free permutations by dynamic programming over
/// (set of placed ranks, last placed rank).
pub fn a002464_count(n: usize, force: bool) -> Result<ExactCount> {
    if n == 0 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    let limit = if force {
        A002464_FORCE_MAX_N
    } else {
        A002464_MAX_N
    };
    if n > limit {
        return Err(Error::GuardExceeded {
            what: "succession-free count",
            n,
            max: limit,
        });
    }
    if n == 1 {
        return Ok(ExactCount::from(1));
    }

    let full = (1usize << n) - 1;
    // ways[mask * n + last]: orders of the ranks in `mask` ending with `last`.
    let mut ways = vec![0u64; (full + 1) * n];
    for last in 0..n {
        ways[(1 << last) * n + last] = 1;
    }
    for mask in 1..=full {
        for last in 0..n {
            let w = ways[mask * n + last];
            if w == 0 {
                continue;
            }
            let mut free = full & !mask;
            while free != 0 {
                let next = free.trailing_zeros() as usize;
                free &= free - 1;
                if next.abs_diff(last) != 1 {
                    ways[(mask | 1 << next) * n + next] += w;
                }
            }
        }
    }
    let total: u64 = ways[full * n..].iter().sum();
    Ok(ExactCount::from(total))
}
