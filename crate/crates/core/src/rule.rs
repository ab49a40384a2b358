//! The stopping rule and the `Λ_n(r, k)` / `Π_n(r)` classification.
//!
//! Positions are 1-based. With threshold `r` the rule rejects positions
//! `1..r-1`, then for `j = r, r+1, ..., n` tests whether the pair
//! `(x[j-1], x[j])` is adjacent within `{x[1], ..., x[j]}` and stops at the
//! first hit `j*`.
//!
//! A permutation lies in `Λ_n(r, k)` when no stop event happens at positions
//! `r..=k` and the pair `(x[k], x[k+1])` is adjacent within the full set
//! `{1..n}`; it lies in `Π_n(r)` when that pair is moreover `{1, n}`. So a
//! `Λ` member is exactly a run that stops at `j* = k + 1 > r` on a globally
//! adjacent pair. Runs stopping already at `j* = r` on a globally adjacent
//! pair belong to no `Λ_n(r, k)`; they are flagged `at_edge`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prefix::PrefixState;
use crate::ranks::{globally_adjacent, Permutation, Rank};

/// Rule threshold: the first checked stop position is `r`, `3 <= r <= n-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Threshold {
    n: usize,
    r: usize,
}

impl Threshold {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if n <= 3 {
            return Err(Error::TooFewApplicants(n));
        }
        if r < 3 || r > n - 1 {
            return Err(Error::ThresholdOutOfRange { n, r, max: n - 1 });
        }
        Ok(Threshold { n, r })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }
}

/// Slack absorbing binary representation error in `alpha * n`, so that for
/// example `0.29 * 100` floors to 29 rather than 28.
const ALPHA_FLOOR_SLACK: f64 = 1e-9;

/// `r = floor(alpha * n)`, rejected (never clamped) when outside `3..=n-1`.
pub fn threshold_from_alpha(n: usize, alpha: f64) -> Result<Threshold> {
    if n <= 3 {
        return Err(Error::TooFewApplicants(n));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let r = (alpha * n as f64 + ALPHA_FLOOR_SLACK).floor() as i64;
    if r < 3 || r > n as i64 - 1 {
        return Err(Error::AlphaOutOfWindow {
            n,
            alpha,
            r,
            lo: 3.0 / n as f64,
        });
    }
    Threshold::new(n, r as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// Selected pair has global ranks differing by one.
    SuccessAdjacent,
    /// Selected pair is `{1, n}`: adjacent only through the wraparound.
    FailWraparound,
    /// Selected pair is adjacent within the prefix but not globally.
    FailPrefixOnly,
    /// No stop event at any position `r..=n`.
    FailNoStop,
}

impl Classification {
    pub fn of_pair(n: usize, a: Rank, b: Rank) -> Self {
        let d = a.get().abs_diff(b.get()) as usize;
        if d == 1 {
            Classification::SuccessAdjacent
        } else if d == n - 1 {
            Classification::FailWraparound
        } else {
            Classification::FailPrefixOnly
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopOutcome {
    pub stop_position: Option<usize>,
    pub selected_pair: Option<(Rank, Rank)>,
    pub classification: Classification,
    /// The rule stopped at the very first checked position `r`.
    pub at_edge: bool,
}

impl StopOutcome {
    fn no_stop() -> Self {
        StopOutcome {
            stop_position: None,
            selected_pair: None,
            classification: Classification::FailNoStop,
            at_edge: false,
        }
    }

    pub fn is_success(&self) -> bool {
        self.classification == Classification::SuccessAdjacent
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaClass {
    /// The unique `k` with the permutation in `Λ_n(r, k)`, if any.
    pub k: Option<usize>,
    pub in_pi: bool,
}

impl LambdaClass {
    const OUTSIDE: LambdaClass = LambdaClass {
        k: None,
        in_pi: false,
    };
}

/// Reusable scratch space for running the rule many times at one `n`.
#[derive(Debug, Clone)]
pub struct RuleRunner {
    state: PrefixState,
    inserted: Vec<Rank>,
    /// Set when `state` holds members missing from `inserted`.
    untracked: bool,
}

impl RuleRunner {
    pub fn new(n: usize) -> Self {
        RuleRunner {
            state: PrefixState::new(n as u32),
            inserted: Vec::with_capacity(n),
            untracked: false,
        }
    }

    fn reset(&mut self) {
        if self.untracked {
            self.state.clear();
            self.inserted.clear();
            self.untracked = false;
        } else {
            self.state.clear_members(self.inserted.drain(..));
        }
    }

    fn push(&mut self, x: Rank) {
        self.state
            .insert(x)
            .expect("interview order repeats a rank");
        self.inserted.push(x);
    }

    fn push_adjacent(&mut self, prev: Rank, new: Rank) -> bool {
        let hit = self
            .state
            .insert_adjacent(prev, new)
            .expect("interview order repeats a rank");
        self.inserted.push(new);
        hit
    }

    /// Runs the rule, pulling the applicant at 0-based position `i` from
    /// `next(i)`. Positions are requested in increasing order and only as far
    /// as the rule needs, so `next` may generate the interview order lazily.
    pub fn run_with<F>(&mut self, t: Threshold, mut next: F) -> StopOutcome
    where
        F: FnMut(usize) -> Rank,
    {
        let (n, r) = (t.n, t.r);
        self.reset();
        for i in 0..r - 1 {
            self.push(next(i));
        }
        let mut prev = *self.inserted.last().expect("r >= 3");
        for j in r..=n {
            let new = next(j - 1);
            if self.push_adjacent(prev, new) {
                return StopOutcome {
                    stop_position: Some(j),
                    selected_pair: Some((prev, new)),
                    classification: Classification::of_pair(n, prev, new),
                    at_edge: j == r,
                };
            }
            prev = new;
        }
        StopOutcome::no_stop()
    }

    /// Runs the rule given only `tail = x[r-1..=n]`. The first `r - 1`
    /// applicants are every rank not in `tail[1..]`; their order is irrelevant
    /// to the rule apart from the last one, `tail[0]`.
    pub fn run_from_tail(&mut self, t: Threshold, tail: &[Rank]) -> StopOutcome {
        let (n, r) = (t.n, t.r);
        debug_assert_eq!(tail.len(), n - r + 2);
        self.inserted.clear();
        self.untracked = true;
        self.state
            .fill_except(tail[1..].iter().copied())
            .expect("tail ranks lie in 1..=n");
        for (w, j) in tail.windows(2).zip(r..=n) {
            let (prev, new) = (w[0], w[1]);
            if self.push_adjacent(prev, new) {
                return StopOutcome {
                    stop_position: Some(j),
                    selected_pair: Some((prev, new)),
                    classification: Classification::of_pair(n, prev, new),
                    at_edge: j == r,
                };
            }
        }
        StopOutcome::no_stop()
    }

    pub fn run(&mut self, x: &[Rank], t: Threshold) -> StopOutcome {
        debug_assert_eq!(x.len(), t.n);
        self.run_with(t, |i| x[i])
    }

    /// Literal membership test for `Λ_n(r, k)` over every `k`, and for `Π_n(r)`.
    pub fn classify(&mut self, x: &[Rank], t: Threshold) -> LambdaClass {
        debug_assert_eq!(x.len(), t.n);
        let (n, r) = (t.n, t.r);
        self.reset();
        for &v in &x[..r - 1] {
            self.push(v);
        }
        // Positions are 1-based: x[k] is x[k - 1] here.
        for k in r..=n - 1 {
            // Condition for i = k: {x[k-1], x[k]} not adjacent in toSet(x[1..k]).
            // Once it fails it fails for every larger k as well.
            if self.push_adjacent(x[k - 2], x[k - 1]) {
                return LambdaClass::OUTSIDE;
            }
            let (a, b) = (x[k - 1], x[k]);
            if globally_adjacent(n as u32, a, b) {
                return LambdaClass {
                    k: Some(k),
                    in_pi: a.get().abs_diff(b.get()) as usize == n - 1,
                };
            }
        }
        LambdaClass::OUTSIDE
    }
}

fn check_len(x: &Permutation, t: Threshold) -> Result<()> {
    if x.len() != t.n {
        return Err(Error::LengthMismatch {
            expected: t.n,
            got: x.len(),
        });
    }
    Ok(())
}

/// Runs the stopping rule on a complete interview order in O(n log n).
pub fn run_rule(x: &Permutation, t: Threshold) -> Result<StopOutcome> {
    check_len(x, t)?;
    Ok(RuleRunner::new(t.n).run(x.as_slice(), t))
}

pub fn classify_lambda(x: &Permutation, t: Threshold) -> Result<LambdaClass> {
    check_len(x, t)?;
    Ok(RuleRunner::new(t.n).classify(x.as_slice(), t))
}

/// Cyclic rank shift `σ^i`: every rank `v` becomes `1 + ((v - 1 + i) mod n)`.
/// `i` is taken modulo `n`.
pub fn sigma_shift(x: &Permutation, i: usize) -> Permutation {
    let n = x.len() as u64;
    if n == 0 {
        return x.clone();
    }
    let i = i as u64 % n;
    Permutation::from_ranks_unchecked(
        x.iter()
            .map(|v| Rank::new_unchecked((1 + (v.get() as u64 - 1 + i) % n) as u32))
            .collect(),
    )
}
