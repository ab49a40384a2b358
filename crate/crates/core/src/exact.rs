//! Closed-form counts and probabilities, in exact big-integer arithmetic.
//!
//! Notation: `n` applicants, threshold `r`, and `k` the position of the first
//! element of the selected pair. All functions take `3 <= r <= k <= n - 1`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact non-negative count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ExactCount(pub BigUint);

impl ExactCount {
    pub fn zero() -> Self {
        ExactCount(BigUint::zero())
    }

    pub fn as_biguint(&self) -> &BigUint {
        &self.0
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }
}

impl From<u64> for ExactCount {
    fn from(v: u64) -> Self {
        ExactCount(BigUint::from(v))
    }
}

impl From<BigUint> for ExactCount {
    fn from(v: BigUint) -> Self {
        ExactCount(v)
    }
}

impl fmt::Display for ExactCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for ExactCount {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

/// Exact rational, always in lowest terms with a positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRatio(BigRational);

impl ExactRatio {
    pub fn new<N: Into<BigInt>, D: Into<BigInt>>(numer: N, denom: D) -> Self {
        ExactRatio(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_integer<N: Into<BigInt>>(v: N) -> Self {
        ExactRatio(BigRational::from_integer(v.into()))
    }

    pub fn zero() -> Self {
        ExactRatio(BigRational::zero())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }
}

impl From<BigRational> for ExactRatio {
    fn from(v: BigRational) -> Self {
        ExactRatio(v)
    }
}

impl fmt::Display for ExactRatio {
    /// `p/q`, or just `p` for integers.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for ExactRatio {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

fn factorial(m: u64) -> BigUint {
    (2..=m).fold(BigUint::one(), |acc, i| acc * i)
}

fn check_nr(n: u64, r: u64) -> Result<()> {
    if n <= 3 {
        return Err(Error::TooFewApplicants(n as usize));
    }
    if r < 3 || r > n - 1 {
        return Err(Error::ThresholdOutOfRange {
            n: n as usize,
            r: r as usize,
            max: n as usize - 1,
        });
    }
    Ok(())
}

fn check_nrk(n: u64, r: u64, k: u64) -> Result<()> {
    check_nr(n, r)?;
    if k < r || k > n - 1 {
        return Err(Error::Parameter(format!(
            "k = {k} outside {r}..={} for n = {n}",
            n - 1
        )));
    }
    Ok(())
}

fn exact_div(numer: BigUint, denom: &BigUint, what: &str) -> BigUint {
    let (q, rem) = numer.div_rem(denom);
    assert!(rem.is_zero(), "{what}: division is not exact");
    q
}

fn rkzz_from_factorial(fact_n_minus_2: &BigUint, r: u64, k: u64) -> BigUint {
    let numer = fact_n_minus_2 * BigUint::from((r - 2) * (r - 3));
    exact_div(
        numer,
        &BigUint::from((k - 1) * (k - 2)),
        "count_lambda_rkzz",
    )
}

/// Permutations in `Λ_n(r, k)` whose pair at positions `(k, k+1)` is one fixed
/// ordered, globally adjacent pair `(z, z̄)`:
/// `(n-2)! (r-2)(r-3) / ((k-1)(k-2))`.
///
/// The count is the same for every such pair, so the pair is not a parameter.
pub fn count_lambda_rkzz(n: u64, r: u64, k: u64) -> Result<ExactCount> {
    check_nrk(n, r, k)?;
    Ok(ExactCount(rkzz_from_factorial(&factorial(n - 2), r, k)))
}

/// `|Λ_n(r, k)| = 2n · count_lambda_rkzz(n, r, k)`; there are `2n` ordered
/// globally adjacent pairs.
pub fn count_lambda_rk(n: u64, r: u64, k: u64) -> Result<ExactCount> {
    Ok(ExactCount(count_lambda_rkzz(n, r, k)?.0 * (2 * n)))
}

/// `|Λ_n(r)| = Σ_{k=r}^{n-1} |Λ_n(r, k)|`, summed term by term.
pub fn count_lambda(n: u64, r: u64) -> Result<ExactCount> {
    check_nr(n, r)?;
    let fact = factorial(n - 2);
    let total = (r..n).fold(BigUint::zero(), |acc, k| {
        acc + rkzz_from_factorial(&fact, r, k) * (2 * n)
    });
    Ok(ExactCount(total))
}

/// `Σ_{k=r}^{n-1} 1/((k-1)(k-2))`, summed directly and checked against the
/// telescoped form `1/(r-2) - 1/(n-2)`.
pub fn telescoping_sum(r: u64, n: u64) -> Result<ExactRatio> {
    check_nr(n, r)?;
    let direct = (r..n).fold(BigRational::zero(), |acc, k| {
        acc + BigRational::new(BigInt::one(), BigInt::from((k - 1) * (k - 2)))
    });
    let closed = BigRational::new(BigInt::one(), BigInt::from(r - 2))
        - BigRational::new(BigInt::one(), BigInt::from(n - 2));
    assert_eq!(
        direct, closed,
        "telescoping identity failed at r={r}, n={n}"
    );
    Ok(ExactRatio(closed))
}

/// `2(r-3)/(n-1) - 2(r-2)(r-3)/((n-1)(n-2))` without cross-checks.
fn lambda_ratio_closed(n: u64, r: u64) -> BigRational {
    let (n, r) = (BigInt::from(n), BigInt::from(r));
    let two = BigInt::from(2);
    BigRational::new(&two * (&r - 3), &n - 1)
        - BigRational::new(&two * (&r - 2) * (&r - 3), (&n - 1) * (&n - 2))
}

/// `|Λ_n(r)| / n!`.
///
/// Checked against the derivation route `2(r-2)(r-3)/(n-1) · Σ 1/((k-1)(k-2))`
/// with the sum evaluated term by term.
pub fn lambda_ratio(n: u64, r: u64) -> Result<ExactRatio> {
    check_nr(n, r)?;
    let closed = lambda_ratio_closed(n, r);
    let prefactor = BigRational::new(BigInt::from(2 * (r - 2) * (r - 3)), BigInt::from(n - 1));
    let derived = prefactor * telescoping_sum(r, n)?.0;
    assert_eq!(
        closed, derived,
        "lambda ratio routes disagree at n={n}, r={r}"
    );
    Ok(ExactRatio(closed))
}

/// `|Π_n(r)| = |Λ_n(r)| / n`.
pub fn pi_count(n: u64, r: u64) -> Result<ExactCount> {
    let lambda = count_lambda(n, r)?;
    Ok(ExactCount(exact_div(
        lambda.0,
        &BigUint::from(n),
        "pi_count",
    )))
}

/// `|Λ_n(r) \ Π_n(r)| / n! = (1 - 1/n) · |Λ_n(r)| / n!`.
pub fn success_probability_exact(n: u64, r: u64) -> Result<ExactRatio> {
    let lambda = lambda_ratio(n, r)?;
    Ok(ExactRatio(
        lambda.0 * BigRational::new(BigInt::from(n - 1), BigInt::from(n)),
    ))
}

/// Limit of `|Λ_n(⌊αn⌋)| / n!` as `n → ∞`: `2α - 2α²`.
pub fn asymptotic_success(alpha: f64) -> f64 {
    2.0 * alpha - 2.0 * alpha * alpha
}

/// Threshold maximizing [`success_probability_exact`] over `r ∈ 3..=n-1`,
/// smallest `r` on ties, with the maximum.
pub fn optimal_threshold(n: u64) -> Result<(u64, ExactRatio)> {
    if n <= 4 {
        return Err(Error::Parameter(format!(
            "optimal threshold needs n > 4, got {n}"
        )));
    }
    // (1 - 1/n) is a common positive factor, so ranking by the closed-form
    // Λ ratio ranks the success probabilities.
    let mut best_r = 3;
    let mut best = lambda_ratio_closed(n, 3);
    for r in 4..n {
        let v = lambda_ratio_closed(n, r);
        if v > best {
            best = v;
            best_r = r;
        }
    }
    Ok((best_r, success_probability_exact(n, best_r)?))
}

/// `n!` as an exact count.
pub fn omega_size(n: u64) -> ExactCount {
    ExactCount(factorial(n))
}
