//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation precondition was violated.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An explicit rate array does not cover the required index range.
    #[error("rate array '{which}' too short: need at least {needed} entries, got {got}")]
    RateArrayTooShort {
        which: &'static str,
        needed: usize,
        got: usize,
    },

    /// A rate that must be strictly positive is zero (or a stored rate is
    /// negative / non-finite).
    #[error("rate {which}[{index}] = {value} is not admissible ({requirement})")]
    BadRate {
        which: char,
        index: usize,
        value: f64,
        requirement: &'static str,
    },

    /// The denominator of a renormalization factor is not strictly positive:
    /// this (schedule, D) pair has no positive parametric solution.
    #[error("nonpositive denominator at index {index} (value {value:e}); no positive solution for this D")]
    NonpositiveDenominator { index: usize, value: f64 },

    /// A pivot in the distribution reconstruction is not strictly positive,
    /// so the sequence does not generate a positive distribution.
    #[error("nonpositive pivot at index {index} (value {value:e})")]
    NonpositivePivot { index: usize, value: f64 },

    /// The correction denominator D - S_n vanished (only possible for
    /// hand-crafted inputs; D < 0 and S >= 0 exclude it).
    #[error("degenerate denominator at index {index}")]
    DegenerateDenominator { index: usize },

    /// An index lies outside the valid range of an operation.
    #[error("index {index} out of range [{min}, {max}]")]
    IndexOutOfRange {
        index: usize,
        min: usize,
        max: usize,
    },

    /// Two vectors that must share a state space do not.
    #[error("dimension mismatch: {expected} vs {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A probability that must be strictly positive is zero or negative.
    #[error("nonpositive probability at state {state}")]
    NonpositiveProbability { state: usize },

    /// The chain is reducible (an interior rate of the generator is zero).
    #[error("reducible chain: zero rate on the {which} diagonal at index {index}")]
    ReducibleChain { which: &'static str, index: usize },

    /// The requested integration step exceeds the stability bound.
    #[error("unstable step: dt = {dt} exceeds bound {max_dt}")]
    UnstableStep { dt: f64, max_dt: f64 },

    /// The post-burn-in window of a trajectory is empty.
    #[error("empty observation window: burn-in {burn_in} >= horizon {t_final}")]
    EmptyWindow { burn_in: f64, t_final: f64 },

    /// A configuration document is malformed.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
