use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranks::Rank;
use crate::rule::{threshold_from_alpha, Classification, RuleRunner, StopOutcome, Threshold};

use super::{default_workers, with_workers};

/// Trials per work unit. Fixed, so the partition of trials into units never
/// depends on the worker count.
pub const TRIALS_PER_BLOCK: u64 = 4096;

const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tallies {
    pub success_adjacent: u64,
    pub fail_wraparound: u64,
    pub fail_prefix_only: u64,
    pub fail_no_stop: u64,
    /// Successes that stopped at the first checked position `r`.
    pub edge_success: u64,
    /// All stops at position `r`, whatever their classification.
    pub edge_stops: u64,
}

impl Tallies {
    fn record(&mut self, out: &StopOutcome) {
        match out.classification {
            Classification::SuccessAdjacent => self.success_adjacent += 1,
            Classification::FailWraparound => self.fail_wraparound += 1,
            Classification::FailPrefixOnly => self.fail_prefix_only += 1,
            Classification::FailNoStop => self.fail_no_stop += 1,
        }
        if out.at_edge {
            self.edge_stops += 1;
            if out.is_success() {
                self.edge_success += 1;
            }
        }
    }

    fn merge(mut self, o: Tallies) -> Tallies {
        self.success_adjacent += o.success_adjacent;
        self.fail_wraparound += o.fail_wraparound;
        self.fail_prefix_only += o.fail_prefix_only;
        self.fail_no_stop += o.fail_no_stop;
        self.edge_success += o.edge_success;
        self.edge_stops += o.edge_stops;
        self
    }

    pub fn total(&self) -> u64 {
        self.success_adjacent + self.fail_wraparound + self.fail_prefix_only + self.fail_no_stop
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub n: usize,
    pub r: usize,
    pub trials: u64,
    pub seed: u64,
    pub p_hat: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub tallies: Tallies,
}

impl EstimateResult {
    fn from_tallies(t: Threshold, trials: u64, seed: u64, tallies: Tallies) -> Self {
        let p_hat = tallies.success_adjacent as f64 / trials as f64;
        let stderr = (p_hat * (1.0 - p_hat) / trials as f64).sqrt();
        EstimateResult {
            n: t.n(),
            r: t.r(),
            trials,
            seed,
            p_hat,
            stderr,
            ci95: (p_hat - Z_95 * stderr, p_hat + Z_95 * stderr),
            tallies,
        }
    }
}

/// Interview order generated by a partial Fisher-Yates shuffle.
///
/// Front to back, only the positions the rule actually inspects are drawn.
/// Back to front, only the tail from position `r - 1` on is drawn; what is
/// left in front is a uniform random set in no particular order, which is all
/// the rule needs from the first `r - 2` applicants. Swaps are logged and
/// undone afterwards, so every trial starts from the identity and its
/// permutation depends on nothing but its own random stream.
struct LazyShuffle {
    items: Vec<Rank>,
    swaps: Vec<u32>,
    backward: bool,
}

impl LazyShuffle {
    fn new(n: usize) -> Self {
        LazyShuffle {
            items: (1..=n as u32).map(Rank::new_unchecked).collect(),
            swaps: Vec::with_capacity(n),
            backward: false,
        }
    }

    #[inline]
    fn draw<R: Rng>(&mut self, i: usize, rng: &mut R) -> Rank {
        debug_assert!(!self.backward && i == self.swaps.len());
        let j = rng.random_range(i as u32..self.items.len() as u32);
        self.items.swap(i, j as usize);
        self.swaps.push(j);
        self.items[i]
    }

    /// Shuffles positions `from..n` into place, last position first.
    fn draw_tail<R: Rng>(&mut self, from: usize, rng: &mut R) -> &[Rank] {
        debug_assert!(self.swaps.is_empty());
        self.backward = true;
        for i in (from..self.items.len()).rev() {
            let j = rng.random_range(0..=i as u32);
            self.items.swap(i, j as usize);
            self.swaps.push(j);
        }
        &self.items[from..]
    }

    fn restore(&mut self) {
        let n = self.items.len();
        if self.swaps.len() * 4 >= n {
            for (i, v) in self.items.iter_mut().enumerate() {
                *v = Rank::new_unchecked(i as u32 + 1);
            }
        } else if self.backward {
            for (k, &j) in self.swaps.iter().enumerate().rev() {
                self.items.swap(n - 1 - k, j as usize);
            }
        } else {
            for (i, &j) in self.swaps.iter().enumerate().rev() {
                self.items.swap(i, j as usize);
            }
        }
        self.swaps.clear();
        self.backward = false;
    }
}

/// Drawing the tail costs `n - r + 2` swaps against at least `r - 1` for the
/// front.
fn draws_tail(t: Threshold) -> bool {
    t.n() - t.r() + 2 < t.r() - 1
}

fn run_block(t: Threshold, base: &ChaCha8Rng, trials: std::ops::Range<u64>) -> Tallies {
    let mut runner = RuleRunner::new(t.n());
    let mut order = LazyShuffle::new(t.n());
    let mut tallies = Tallies::default();
    for trial in trials {
        let mut rng = base.clone();
        rng.set_stream(trial);
        let out = if draws_tail(t) {
            runner.run_from_tail(t, order.draw_tail(t.r() - 2, &mut rng))
        } else {
            runner.run_with(t, |i| order.draw(i, &mut rng))
        };
        order.restore();
        tallies.record(&out);
    }
    tallies
}

/// Monte Carlo estimate of the rule's success probability at threshold `r`.
///
/// Trial `i` draws from stream `i` of a ChaCha8 generator keyed by `seed`,
/// so the tallies are identical for every worker count.
pub fn estimate(
    n: usize,
    r: usize,
    trials: u64,
    seed: u64,
    workers: Option<usize>,
) -> Result<EstimateResult> {
    if n <= 4 {
        return Err(Error::Parameter(format!("estimation needs n > 4, got {n}")));
    }
    let t = Threshold::new(n, r)?;
    estimate_at(t, trials, seed, workers)
}

fn estimate_at(
    t: Threshold,
    trials: u64,
    seed: u64,
    workers: Option<usize>,
) -> Result<EstimateResult> {
    if trials == 0 {
        return Err(Error::Parameter("trials must be at least 1".into()));
    }
    let base = ChaCha8Rng::seed_from_u64(seed);
    let blocks = trials.div_ceil(TRIALS_PER_BLOCK);
    let tallies = with_workers(workers.unwrap_or_else(default_workers), || {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let start = b * TRIALS_PER_BLOCK;
                run_block(t, &base, start..(start + TRIALS_PER_BLOCK).min(trials))
            })
            .reduce(Tallies::default, Tallies::merge)
    })?;
    Ok(EstimateResult::from_tallies(t, trials, seed, tallies))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub outcome: Result<EstimateResult>,
}

/// One estimate per `alpha`, every row using the same seed. A threshold
/// error is reported in its row and does not stop the sweep.
pub fn sweep(
    n: usize,
    alphas: &[f64],
    trials: u64,
    seed: u64,
    workers: Option<usize>,
) -> Vec<SweepRow> {
    alphas
        .iter()
        .map(|&alpha| SweepRow {
            alpha,
            outcome: threshold_from_alpha(n, alpha)
                .and_then(|t| estimate(t.n(), t.r(), trials, seed, workers)),
        })
        .collect()
}
