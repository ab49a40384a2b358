use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Domain errors raised by every layer of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rank {value} is outside 1..={n}")]
    RankOutOfRange { value: u32, n: u32 },

    #[error("rank must be at least 1")]
    ZeroRank,

    #[error("rank {0} is not a member of the set")]
    NotAMember(u32),

    #[error("rank {0} appears more than once")]
    DuplicateRank(u32),

    #[error("sequence of length {len} is not a permutation of 1..={len}")]
    NotAPermutation { len: usize },

    #[error("set has {size} members, at least {min} required")]
    SetTooSmall { size: usize, min: usize },

    #[error("adjacency is undefined for a rank paired with itself ({0})")]
    SelfPair(u32),

    #[error("delta set needs k >= 3, got {0}")]
    DeltaTooSmall(usize),

    #[error("applicant count n = {0} must exceed 3")]
    TooFewApplicants(usize),

    #[error("threshold r = {r} outside 3..={max} for n = {n}")]
    ThresholdOutOfRange { n: usize, r: usize, max: usize },

    #[error("alpha = {alpha} gives r = {r} for n = {n}; valid alpha window is [{lo}, 1)")]
    AlphaOutOfWindow {
        n: usize,
        alpha: f64,
        r: i64,
        lo: f64,
    },

    #[error("alpha = {0} must lie strictly between 0 and 1")]
    InvalidAlpha(f64),

    #[error("invalid parameters: {0}")]
    Parameter(String),

    #[error("n = {n} exceeds the guard {max} for {what}; pass force to override")]
    GuardExceeded {
        what: &'static str,
        n: usize,
        max: usize,
    },

    #[error("permutation length {got} does not match threshold n = {expected}")]
    LengthMismatch { expected: usize, got: usize },
}
