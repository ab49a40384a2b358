use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{self, ExactCount, ExactRatio};
use crate::ranks::{globally_adjacent, Rank};
use crate::rule::{Classification, RuleRunner, Threshold};

use super::{default_workers, next_permutation, with_workers};

/// Largest `n` enumerated without `force`.
pub const ENUMERATION_MAX_N: usize = 11;

/// Exhaustive tallies over all `n!` interview orders for one threshold.
///
/// Every permutation falls in exactly one of: a `Λ_n(r, k)` (counted in
/// `per_k_lambda`), an edge stop at position `r` on a globally adjacent pair
/// (`edge_success` or `edge_wrap`), a prefix-only stop, or no stop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnumerationReport {
    pub n: usize,
    pub r: usize,
    pub per_k_lambda: BTreeMap<usize, ExactCount>,
    pub lambda_total: ExactCount,
    pub pi_count: ExactCount,
    pub edge_success_count: ExactCount,
    pub edge_wrap_count: ExactCount,
    pub prefix_only_fail_count: ExactCount,
    pub no_stop_count: ExactCount,
    /// Permutations on which the rule itself selects a globally adjacent,
    /// non-wraparound pair.
    pub rule_success_count: ExactCount,
    /// Permutations whose literal `Λ` classification disagrees with the run
    /// of the rule. Zero unless something is broken.
    pub reconciliation_mismatches: ExactCount,
    pub total: ExactCount,
}

impl EnumerationReport {
    pub fn lambda_minus_pi(&self) -> ExactCount {
        ExactCount(&self.lambda_total.0 - &self.pi_count.0)
    }

    /// `|E| / n!`.
    pub fn edge_fraction(&self) -> ExactRatio {
        ratio_of(&self.edge_success_count, &self.total)
    }

    pub fn rule_success_fraction(&self) -> ExactRatio {
        ratio_of(&self.rule_success_count, &self.total)
    }

    pub fn lambda_fraction(&self) -> ExactRatio {
        ratio_of(&self.lambda_total, &self.total)
    }
}

fn ratio_of(a: &ExactCount, b: &ExactCount) -> ExactRatio {
    ExactRatio::from(BigRational::new(
        BigInt::from(a.0.clone()),
        BigInt::from(b.0.clone()),
    ))
}

#[derive(Debug, Clone, Default)]
struct Tally {
    per_k: Vec<u64>,
    pi: u64,
    edge_success: u64,
    edge_wrap: u64,
    prefix_only: u64,
    no_stop: u64,
    rule_success: u64,
    mismatches: u64,
    total: u64,
}

impl Tally {
    fn new(n: usize) -> Self {
        Tally {
            per_k: vec![0; n],
            ..Tally::default()
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.per_k.iter_mut().zip(&other.per_k) {
            *a += b;
        }
        self.pi += other.pi;
        self.edge_success += other.edge_success;
        self.edge_wrap += other.edge_wrap;
        self.prefix_only += other.prefix_only;
        self.no_stop += other.no_stop;
        self.rule_success += other.rule_success;
        self.mismatches += other.mismatches;
        self.total += other.total;
        self
    }

    fn record(&mut self, runner: &mut RuleRunner, x: &[Rank], t: Threshold) {
        let n = t.n();
        let out = runner.run(x, t);
        let class = runner.classify(x, t);
        self.total += 1;

        let globally = out
            .selected_pair
            .is_some_and(|(a, b)| globally_adjacent(n as u32, a, b));
        match out.classification {
            Classification::SuccessAdjacent => self.rule_success += 1,
            Classification::FailPrefixOnly => self.prefix_only += 1,
            Classification::FailNoStop => self.no_stop += 1,
            Classification::FailWraparound => {}
        }
        if globally && out.at_edge {
            match out.classification {
                Classification::SuccessAdjacent => self.edge_success += 1,
                _ => self.edge_wrap += 1,
            }
        }

        let expected_k = (globally && !out.at_edge).then(|| out.stop_position.unwrap() - 1);
        if class.k != expected_k {
            self.mismatches += 1;
        }
        if let Some(k) = class.k {
            self.per_k[k] += 1;
            if class.in_pi {
                self.pi += 1;
            }
        }
    }
}

fn check_enumeration_range(n: usize, force: bool) -> Result<()> {
    if n <= 4 {
        return Err(Error::Parameter(format!(
            "enumeration needs n > 4, got {n}"
        )));
    }
    if n > ENUMERATION_MAX_N && !force {
        return Err(Error::GuardExceeded {
            what: "enumeration",
            n,
            max: ENUMERATION_MAX_N,
        });
    }
    Ok(())
}

/// Classifies every permutation of `1..=n` under threshold `r`.
///
/// Work is split by the first interviewed applicant: each unit walks the
/// `(n-1)!` orders of the remaining ranks lexicographically. Units share no
/// state and their tallies are summed, so the result is independent of the
/// worker count.
pub fn enumerate_counts(
    n: usize,
    r: usize,
    force: bool,
    workers: Option<usize>,
) -> Result<EnumerationReport> {
    check_enumeration_range(n, force)?;
    let t = Threshold::new(n, r)?;
    let workers = workers.unwrap_or_else(default_workers);

    let tally = with_workers(workers, || {
        (1..=n as u32)
            .into_par_iter()
            .map(|first| {
                let mut x: Vec<Rank> = std::iter::once(first)
                    .chain((1..=n as u32).filter(|&v| v != first))
                    .map(Rank::new_unchecked)
                    .collect();
                let mut runner = RuleRunner::new(n);
                let mut tally = Tally::new(n);
                loop {
                    tally.record(&mut runner, &x, t);
                    if !next_permutation(&mut x[1..]) {
                        break;
                    }
                }
                tally
            })
            .reduce(|| Tally::new(n), Tally::merge)
    })?;

    let c = |v: u64| ExactCount::from(v);
    let per_k_lambda: BTreeMap<usize, ExactCount> =
        (r..n).map(|k| (k, c(tally.per_k[k]))).collect();
    let lambda_total: u64 = tally.per_k.iter().sum();
    Ok(EnumerationReport {
        n,
        r,
        per_k_lambda,
        lambda_total: c(lambda_total),
        pi_count: c(tally.pi),
        edge_success_count: c(tally.edge_success),
        edge_wrap_count: c(tally.edge_wrap),
        prefix_only_fail_count: c(tally.prefix_only),
        no_stop_count: c(tally.no_stop),
        rule_success_count: c(tally.rule_success),
        reconciliation_mismatches: c(tally.mismatches),
        total: c(tally.total),
    })
}

/// One compared quantity in a [`VerificationReport`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub quantity: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

impl Check {
    fn equal<T: PartialEq + ToString>(quantity: impl Into<String>, expected: T, actual: T) -> Self {
        Check {
            quantity: quantity.into(),
            pass: expected == actual,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub n: usize,
    pub r: usize,
    pub checks: Vec<Check>,
    pub enumeration: EnumerationReport,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_divergence(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }
}

/// Compares enumerated counts with the closed forms in [`crate::exact`].
///
/// The rule's own success count is reconciled as `|Λ \ Π| + |E|`, where `E`
/// is the edge mass outside every `Λ_n(r, k)`; `|E| / n!` must stay within
/// `2/n`.
pub fn verify_against_exact(
    n: usize,
    r: usize,
    force: bool,
    workers: Option<usize>,
) -> Result<VerificationReport> {
    let report = enumerate_counts(n, r, force, workers)?;
    let (n64, r64) = (n as u64, r as u64);
    let mut checks = Vec::new();

    for (&k, got) in &report.per_k_lambda {
        let want = exact::count_lambda_rk(n64, r64, k as u64)?;
        checks.push(Check::equal(
            format!("lambda_count[k={k}]"),
            want,
            got.clone(),
        ));
    }
    checks.push(Check::equal(
        "pi_count",
        exact::pi_count(n64, r64)?,
        report.pi_count.clone(),
    ));
    checks.push(Check::equal(
        "lambda_ratio",
        exact::lambda_ratio(n64, r64)?,
        report.lambda_fraction(),
    ));

    let omega = exact::omega_size(n64);
    let success = exact::success_probability_exact(n64, r64)?;
    let lambda_minus_pi_expected =
        BigRational::from_integer(BigInt::from(omega.0.clone())) * success.as_rational();
    checks.push(Check::equal(
        "lambda_minus_pi",
        ExactRatio::from(lambda_minus_pi_expected),
        ExactRatio::from_integer(BigInt::from(report.lambda_minus_pi().0)),
    ));
    checks.push(Check::equal("total", omega, report.total.clone()));

    let reconciled = report.lambda_minus_pi().0 + &report.edge_success_count.0;
    checks.push(Check::equal(
        "rule_success = lambda_minus_pi + edge_success",
        ExactCount(reconciled),
        report.rule_success_count.clone(),
    ));

    let partition: BigUint = report.lambda_total.0.clone()
        + &report.edge_success_count.0
        + &report.edge_wrap_count.0
        + &report.prefix_only_fail_count.0
        + &report.no_stop_count.0;
    checks.push(Check::equal(
        "outcome partition",
        report.total.clone(),
        ExactCount(partition),
    ));

    let bound = ExactRatio::new(2, n as i64);
    let edge = report.edge_fraction();
    checks.push(Check {
        quantity: "edge_fraction <= 2/n".into(),
        pass: edge <= bound,
        expected: format!("<= {bound}"),
        actual: edge.to_string(),
    });
    checks.push(Check::equal(
        "reconciliation_mismatches",
        ExactCount::zero(),
        report.reconciliation_mismatches.clone(),
    ));

    Ok(VerificationReport {
        n,
        r,
        checks,
        enumeration: report,
    })
}
