//! Acceptance suite. Runs every criterion in sequence (so wall-clock limits
//! are measured without other tests competing for cores), prints one
//! PASS/FAIL line per criterion, and exits non-zero if any criterion fails.
//! Built without the libtest harness so the lines are never captured.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::{seq::index::sample, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stoprule::exact::{self, ExactCount, ExactRatio};
use stoprule::experiments::{self, next_permutation, EnumerationReport};
use stoprule::ranks::{adjacent_count, Rank, RankSet};
use stoprule::rule::{classify_lambda, sigma_shift};
use stoprule::{Permutation, Threshold};

const SEED: u64 = 7;

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn enumerate_small() -> (BTreeMap<(usize, usize), EnumerationReport>, Duration) {
    let start = Instant::now();
    let mut reports = BTreeMap::new();
    for n in 5..=8 {
        for r in 3..n {
            let rep = experiments::enumerate_counts(n, r, false, None).unwrap();
            reports.insert((n, r), rep);
        }
    }
    (reports, start.elapsed())
}

fn c1_exact_counts(
    reports: &BTreeMap<(usize, usize), EnumerationReport>,
    elapsed: Duration,
) -> Outcome {
    let mut bad = Vec::new();
    for (&(n, r), rep) in reports {
        for k in r..n {
            let want = exact::count_lambda_rk(n as u64, r as u64, k as u64).unwrap();
            if rep.per_k_lambda[&k] != want {
                bad.push(format!(
                    "n={n} r={r} k={k}: {} != {want}",
                    rep.per_k_lambda[&k]
                ));
            }
        }
    }
    let spot = &reports[&(7, 4)].per_k_lambda[&5];
    let pass =
        bad.is_empty() && *spot == ExactCount::from(280) && elapsed < Duration::from_secs(60);
    Outcome {
        id: 1,
        name: "exact |Λ_n(r,k)| for n in 5..=8",
        pass,
        detail: format!(
            "{} mismatches, spot (7,4,5) = {spot}, enumeration took {:.2?} (< 60s){}",
            bad.len(),
            elapsed,
            bad.first()
                .map(|b| format!("; first: {b}"))
                .unwrap_or_default()
        ),
    }
}

fn c2_pi_ratio(reports: &BTreeMap<(usize, usize), EnumerationReport>) -> Outcome {
    let mut bad = 0;
    for (&(n, _), rep) in reports {
        let n_times_pi = rep.pi_count.as_biguint() * n as u64;
        if &n_times_pi != rep.lambda_total.as_biguint() {
            bad += 1;
        }
    }
    let spot = &reports[&(7, 4)];
    let pass = bad == 0
        && spot.pi_count == ExactCount::from(144)
        && spot.lambda_total == ExactCount::from(1008);
    Outcome {
        id: 2,
        name: "|Π_n(r)| = |Λ_n(r)| / n",
        pass,
        detail: format!(
            "{bad} mismatches, spot (7,4): {} of {}",
            spot.pi_count, spot.lambda_total
        ),
    }
}

fn c3_lambda_ratio(reports: &BTreeMap<(usize, usize), EnumerationReport>) -> Outcome {
    let mut bad = 0;
    for (&(n, r), rep) in reports {
        // Closed form written out independently of the library routine.
        let (nn, rr) = (n as i64, r as i64);
        let want = ExactRatio::from(
            num_rational::BigRational::new((2 * (rr - 3)).into(), (nn - 1).into())
                - num_rational::BigRational::new(
                    (2 * (rr - 2) * (rr - 3)).into(),
                    ((nn - 1) * (nn - 2)).into(),
                ),
        );
        if rep.lambda_fraction() != want {
            bad += 1;
        }
    }
    let spot = reports[&(6, 4)].lambda_fraction();
    Outcome {
        id: 3,
        name: "|Λ_n(r)| / n! matches the closed form",
        pass: bad == 0 && spot == ExactRatio::new(1, 5),
        detail: format!("{bad} mismatches, spot (6,4) = {spot}"),
    }
}

fn c4_reconciliation(reports: &BTreeMap<(usize, usize), EnumerationReport>) -> Outcome {
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for (&(n, r), rep) in reports {
        let reconciled = rep.lambda_minus_pi().as_biguint() + rep.edge_success_count.as_biguint();
        let edge = rep.edge_fraction();
        worst = worst.max(edge.to_f64() * n as f64);
        if &reconciled != rep.rule_success_count.as_biguint()
            || edge > ExactRatio::new(2, n as i64)
            || rep.reconciliation_mismatches != ExactCount::zero()
        {
            bad.push((n, r));
        }
    }
    Outcome {
        id: 4,
        name: "rule successes = |Λ∖Π| + |E|, |E|/n! <= 2/n",
        pass: bad.is_empty(),
        detail: format!("failing (n,r): {bad:?}; max n·|E|/n! = {worst:.6}"),
    }
}

fn c5_asymptotic_optimum() -> Outcome {
    let start = Instant::now();
    let alphas: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
    let rows = experiments::sweep(10_000, &alphas, 100_000, SEED, None);
    let elapsed = start.elapsed();
    let p: Vec<f64> = rows
        .iter()
        .map(|r| r.outcome.as_ref().unwrap().p_hat)
        .collect();
    let best = (0..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
    let pass =
        alphas[best] == 0.5 && (p[4] - 0.5).abs() <= 0.01 && elapsed < Duration::from_secs(120);
    Outcome {
        id: 5,
        name: "Monte Carlo optimum at alpha = 0.5 with p ≈ 1/2 (n = 10^4)",
        pass,
        detail: format!(
            "argmax alpha = {}, p_hat(0.5) = {:.5}, curve = {:?}, took {:.2?} (< 120s)",
            alphas[best],
            p[4],
            p.iter()
                .map(|v| (v * 1e4).round() / 1e4)
                .collect::<Vec<_>>(),
            elapsed
        ),
    }
}

fn c6_monte_carlo_vs_exact() -> Outcome {
    let n = 1000;
    let res = experiments::estimate(n, 500, 1_000_000, SEED, None).unwrap();
    let exact = exact::success_probability_exact(1000, 500)
        .unwrap()
        .to_f64();
    let lo = exact - 4.0 * res.stderr;
    let hi = exact + 2.0 / n as f64 + 4.0 * res.stderr;
    Outcome {
        id: 6,
        name: "Monte Carlo at n = 1000, r = 500 brackets the exact value",
        pass: (lo..=hi).contains(&res.p_hat),
        detail: format!(
            "p_hat = {:.6}, interval [{lo:.6}, {hi:.6}], exact = {exact:.6}",
            res.p_hat
        ),
    }
}

fn c7_argmax() -> Outcome {
    let mut rows = Vec::new();
    let mut pass = true;
    for n in [50u64, 100, 500, 1000] {
        let (r, _) = exact::optimal_threshold(n).unwrap();
        let dev = (r as f64 / n as f64 - 0.5).abs();
        pass &= dev <= 2.0 / n as f64;
        rows.push(format!("n={n}: r*={r}"));
    }
    Outcome {
        id: 7,
        name: "|r*/n - 1/2| <= 2/n",
        pass,
        detail: rows.join(", "),
    }
}

fn c8_two_adjacent_partners() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let cases = 10_000;
    let mut bad = 0;
    for _ in 0..cases {
        let n = rng.random_range(3..=200usize);
        let size = rng.random_range(3..=n);
        let members: Vec<Rank> = sample(&mut rng, n, size)
            .into_iter()
            .map(|i| Rank::new(i as u32 + 1).unwrap())
            .collect();
        let x = members[rng.random_range(0..size)];
        let set = RankSet::new(members).unwrap();
        if adjacent_count(&set, x).unwrap() != 2 {
            bad += 1;
        }
    }
    Outcome {
        id: 8,
        name: "every member of |P| >= 3 has exactly two adjacent partners",
        pass: bad == 0,
        detail: format!("{bad} failures over {cases} random (P, x)"),
    }
}

fn c9_orbits() -> Outcome {
    let mut orbits = 0u64;
    let mut bad = Vec::new();
    for n in [6usize, 7] {
        for r in 3..n {
            let t = Threshold::new(n, r).unwrap();
            let mut values: Vec<u32> = (1..=n as u32).collect();
            loop {
                let x = Permutation::new(values.clone()).unwrap();
                let class = classify_lambda(&x, t).unwrap();
                if let Some(k) = class.k {
                    orbits += 1;
                    let mut pi_members = 0;
                    for i in 0..n {
                        let c = classify_lambda(&sigma_shift(&x, i), t).unwrap();
                        if c.k != Some(k) {
                            bad.push(format!("{x} r={r} shift {i}"));
                        }
                        pi_members += c.in_pi as usize;
                    }
                    if pi_members != 1 {
                        bad.push(format!("{x} r={r}: {pi_members} Π members"));
                    }
                }
                if !next_permutation(&mut values) {
                    break;
                }
            }
        }
    }
    Outcome {
        id: 9,
        name: "σ-orbits of Λ members keep k and hold exactly one Π member",
        pass: bad.is_empty() && orbits > 0,
        detail: format!(
            "{orbits} Λ members checked, {} violations{}",
            bad.len(),
            bad.first()
                .map(|b| format!("; first: {b}"))
                .unwrap_or_default()
        ),
    }
}

fn c10_successions() -> Outcome {
    let brute = |n: u32| {
        let mut v: Vec<u32> = (1..=n).collect();
        let mut count = 0u64;
        loop {
            if v.windows(2).all(|w| w[0].abs_diff(w[1]) != 1) {
                count += 1;
            }
            if !next_permutation(&mut v) {
                break;
            }
        }
        count
    };
    let a4 = experiments::a002464_count(4, false).unwrap();
    let a5 = experiments::a002464_count(5, false).unwrap();
    let a12 = experiments::a002464_count(12, false).unwrap();
    let frac = a12.to_u64().unwrap() as f64 / exact::omega_size(12).to_u64().unwrap() as f64;
    let limit = (-2.0f64).exp();
    let pass = a4 == ExactCount::from(2)
        && a5 == ExactCount::from(14)
        && brute(4) == 2
        && brute(5) == 14
        && (frac - limit).abs() <= 0.02;
    Outcome {
        id: 10,
        name: "succession-free permutation counts",
        pass,
        detail: format!("a(4) = {a4}, a(5) = {a5}, a(12)/12! = {frac:.6}, e^-2 = {limit:.6}"),
    }
}

fn c11_determinism() -> Outcome {
    let one = experiments::estimate(1000, 500, 50_000, SEED, Some(1)).unwrap();
    let eight = experiments::estimate(1000, 500, 50_000, SEED, Some(8)).unwrap();
    Outcome {
        id: 11,
        name: "identical tallies for 1 and 8 workers",
        pass: one.tallies == eight.tallies && one == eight,
        detail: format!(
            "workers=1: {:?}; workers=8: {:?}",
            one.tallies, eight.tallies
        ),
    }
}

fn main() -> std::process::ExitCode {
    let (reports, enum_time) = enumerate_small();
    let outcomes = vec![
        c1_exact_counts(&reports, enum_time),
        c2_pi_ratio(&reports),
        c3_lambda_ratio(&reports),
        c4_reconciliation(&reports),
        c5_asymptotic_optimum(),
        c6_monte_carlo_vs_exact(),
        c7_argmax(),
        c8_two_adjacent_partners(),
        c9_orbits(),
        c10_successions(),
        c11_determinism(),
    ];
    for o in &outcomes {
        println!(
            "[{}] criterion {:>2}: {} | {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.name,
            o.detail
        );
    }
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    println!(
        "acceptance: {} of {} criteria passed",
        outcomes.len() - failed.len(),
        outcomes.len()
    );
    if failed.is_empty() {
        std::process::ExitCode::SUCCESS
    } else {
        eprintln!("failed criteria: {failed:?}");
        std::process::ExitCode::FAILURE
    }
}
