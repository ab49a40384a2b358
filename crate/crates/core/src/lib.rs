//! Adjacent-pair secretary stopping rule.
//!
//! Applicants are interviewed in a uniformly random order and identified
//! with their global ranks `1..=n`. After rejecting the first `r - 1`
//! applicants, the rule selects the first consecutive pair whose ranks are
//! adjacent among the applicants seen so far (the minimum and maximum of the
//! seen set count as adjacent). Selection succeeds when the pair's global
//! ranks differ by exactly one.
//!
//! The crate is split into:
//! - [`ranks`]: relative ranks, the adjacency relation and the incremental
//!   [`PrefixState`] index,
//! - [`rule`]: executable semantics of the rule and the exact `Λ/Π`
//!   classification of a permutation,
//! - [`exact`]: closed-form counts and probabilities in exact rational
//!   arithmetic, plus the discrete threshold optimizer,
//! - [`experiments`]: exhaustive enumeration, seeded Monte Carlo and the
//!   no-succession permutation count,
//! - [`cli`]: the `stoprule` command-line driver.

pub mod cli;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod prefix;
pub mod ranks;
pub mod rule;

pub use error::{Error, Result};
pub use exact::{ExactCount, ExactRatio};
pub use prefix::PrefixState;
pub use ranks::{Permutation, Rank, RankSet};
pub use rule::{Classification, LambdaClass, StopOutcome, Threshold};
