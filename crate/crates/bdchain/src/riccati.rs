//! Discrete Riccati route to stationary solutions.
//!
//! The stationarity condition of the chain, written for the probability
//! ratios `P_{n-1}/P_n`, becomes a quadratic first-order recurrence (a
//! discrete Riccati equation) under the substitution
//!
//! ```text
//! y_{n-1} = P_{n-1}/P_n + (1 - sigma_n)/b_{n-1},     n != 0.
//! ```
//!
//! Its particular solution `y0_n = (1 - b_{n+1})/b_n` regenerates the
//! classical stationary distribution. The general solution adds a
//! one-parameter correction built from the telescoping weight products
//!
//! ```text
//! f_n = prod_{i=0..n} b_i d_{i+2} / b_{i+1}^2,   f_{-1} = 1,
//! S_n = sum_{k=0..n} f_k b_{k+1} / d_{k+2},      S_{-1} = 0,
//! ```
//!
//! as `y_n = y0_n + f_{n-1} / (D - S_{n-1})` with a free constant `D < 0`.
//! Inverting the substitution,
//!
//! ```text
//! P_{n+1} = P_n / (y_n + (sigma_{n+1} - 1)/b_n),
//! ```
//!
//! turns any admissible sequence back into a distribution.

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::schedule::RateSchedule;
use crate::stationary::{Distribution, Provenance};

/// Free parameter of the stationary solution family: a strictly negative
/// real, or the distinguished limit `D -> -inf` under which the family
/// collapses to the classical stationary solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DParam {
    Finite(f64),
    NegInf,
}

impl DParam {
    /// Wraps a finite, strictly negative value.
    pub fn finite(value: f64) -> Result<Self> {
        if !value.is_finite() || value >= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "D must be a finite negative real (or the token \"inf\" for the limit), got {value}"
            )));
        }
        Ok(DParam::Finite(value))
    }

    /// Parses `"-4"`-style negative reals or the tokens `"inf"` / `"-inf"`.
    pub fn parse(token: &str) -> Result<Self> {
        let t = token.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("-inf") {
            return Ok(DParam::NegInf);
        }
        let v = f64::from_str(t)
            .map_err(|_| Error::InvalidParameter(format!("cannot parse D value '{token}'")))?;
        Self::finite(v)
    }

    /// `|D|` for the finite case, `None` for the limit.
    pub fn abs(&self) -> Option<f64> {
        match self {
            DParam::Finite(v) => Some(v.abs()),
            DParam::NegInf => None,
        }
    }

    pub fn is_neg_inf(&self) -> bool {
        matches!(self, DParam::NegInf)
    }
}

impl fmt::Display for DParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DParam::Finite(v) => write!(f, "{v}"),
            DParam::NegInf => write!(f, "inf"),
        }
    }
}

impl Serialize for DParam {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DParam::Finite(v) => serializer.serialize_f64(*v),
            DParam::NegInf => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for DParam {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(v) => DParam::finite(v).map_err(D::Error::custom),
            Raw::Text(t) => DParam::parse(&t).map_err(D::Error::custom),
        }
    }
}

/// Factor-ratio window outside which the weight recurrence switches to
/// log-space evaluation.
const LINEAR_FACTOR_WINDOW: (f64, f64) = (1e-6, 1e6);
/// Chain length above which the weight recurrence switches to log-space.
const LINEAR_MAX_LEN: usize = 64;

/// Cached weight products `f_n` and partial sums `S_n` for `n` in
/// `[-1, N-1]`, computed once per schedule by recurrence.
///
/// Long or strongly skewed schedules are evaluated in log space so the
/// products cannot overflow or underflow; the partial sums always
/// accumulate in linear space with compensated summation.
#[derive(Debug, Clone)]
pub struct RiccatiWeights {
    n_max: usize,
    /// Slot `k` holds the value at `n = k - 1`; slot 0 is `f_{-1} = 1`.
    product: Vec<f64>,
    log_product: Vec<f64>,
    partial_sum: Vec<f64>,
    log_mode: bool,
}

impl RiccatiWeights {
    pub fn new(schedule: &RateSchedule) -> Result<Self> {
        let n_max = schedule.last_state();
        let mut factors = Vec::with_capacity(n_max);
        for n in 0..n_max as isize {
            let b_next = schedule.birth(n + 1);
            if b_next == 0.0 {
                return Err(Error::BadRate {
                    which: 'b',
                    index: (n + 1) as usize,
                    value: 0.0,
                    requirement: "strictly positive for the weight products",
                });
            }
            let d_next = schedule.death(n + 2);
            if d_next == 0.0 {
                return Err(Error::BadRate {
                    which: 'd',
                    index: (n + 2) as usize,
                    value: 0.0,
                    requirement: "strictly positive for the weight partial sums",
                });
            }
            factors.push(schedule.birth(n) * d_next / (b_next * b_next));
        }
        let log_mode = n_max > LINEAR_MAX_LEN
            || factors
                .iter()
                .any(|&f| f < LINEAR_FACTOR_WINDOW.0 || f > LINEAR_FACTOR_WINDOW.1);
        Ok(Self::build(schedule, &factors, log_mode))
    }

    #[cfg(test)]
    pub(crate) fn with_forced_mode(schedule: &RateSchedule, log_mode: bool) -> Self {
        let n_max = schedule.last_state();
        let factors: Vec<f64> = (0..n_max as isize)
            .map(|n| {
                schedule.birth(n) * schedule.death(n + 2)
                    / (schedule.birth(n + 1) * schedule.birth(n + 1))
            })
            .collect();
        Self::build(schedule, &factors, log_mode)
    }

    fn build(schedule: &RateSchedule, factors: &[f64], log_mode: bool) -> Self {
        let n_max = schedule.last_state();
        let mut product = Vec::with_capacity(n_max + 1);
        let mut log_product = Vec::with_capacity(n_max + 1);
        let mut partial_sum = Vec::with_capacity(n_max + 1);
        product.push(1.0);
        log_product.push(0.0);
        partial_sum.push(0.0);
        let mut sum = 0.0;
        let mut comp = 0.0; // Kahan compensation
        for (k, &factor) in factors.iter().enumerate() {
            let n = k as isize;
            log_product.push(log_product[k] + factor.ln());
            let f_n = if log_mode {
                log_product[k + 1].exp()
            } else {
                product[k] * factor
            };
            product.push(f_n);
            let term = f_n * schedule.birth(n + 1) / schedule.death(n + 2);
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            partial_sum.push(sum);
        }
        Self {
            n_max,
            product,
            log_product,
            partial_sum,
            log_mode,
        }
    }

    pub fn last_state(&self) -> usize {
        self.n_max
    }

    pub fn log_mode(&self) -> bool {
        self.log_mode
    }

    /// Weight product `f_n` for `n` in `[-1, N-1]`.
    pub fn product(&self, n: isize) -> f64 {
        self.product[self.slot(n)]
    }

    /// Partial sum `S_n` for `n` in `[-1, N-1]`.
    pub fn partial_sum(&self, n: isize) -> f64 {
        self.partial_sum[self.slot(n)]
    }

    /// `f_n * num / den`, evaluated in log space when the cache is in log
    /// mode so intermediate magnitudes stay bounded.
    pub(crate) fn scaled_product(&self, n: isize, num: f64, den: f64) -> f64 {
        if self.log_mode {
            (self.log_product[self.slot(n)] + num.ln() - den.ln()).exp()
        } else {
            self.product(n) * num / den
        }
    }

    /// Correction term `f_n / denom` for a strictly negative `denom`.
    pub(crate) fn correction(&self, n: isize, denom: f64) -> f64 {
        if self.log_mode {
            -(self.log_product[self.slot(n)] - (-denom).ln()).exp()
        } else {
            self.product(n) / denom
        }
    }

    fn slot(&self, n: isize) -> usize {
        assert!(
            (-1..self.n_max as isize).contains(&n),
            "weight index {n} out of range [-1, {}]",
            self.n_max as isize - 1
        );
        (n + 1) as usize
    }
}

/// Particular Riccati solution value `y0_n = (1 - b_{n+1}) / b_n`.
pub fn particular_value(schedule: &RateSchedule, n: usize) -> f64 {
    assert!(n < schedule.last_state(), "index {n} out of range");
    let n = n as isize;
    (1.0 - schedule.birth(n + 1)) / schedule.birth(n)
}

/// A candidate solution `y_0 .. y_{N-1}` of the Riccati recurrence for a
/// given schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiSequence {
    values: Vec<f64>,
    schedule_label: String,
}

impl RiccatiSequence {
    /// The particular solution `y0`.
    pub fn particular(schedule: &RateSchedule) -> Self {
        let values = (0..schedule.last_state())
            .map(|n| particular_value(schedule, n))
            .collect();
        Self {
            values,
            schedule_label: schedule.label().to_string(),
        }
    }

    /// The general solution `y_n = y0_n + f_{n-1} / (D - S_{n-1})`; the
    /// limit `D -> -inf` yields the particular solution exactly.
    pub fn general(schedule: &RateSchedule, d: DParam) -> Result<Self> {
        let d_value = match d {
            DParam::NegInf => return Ok(Self::particular(schedule)),
            DParam::Finite(v) => v,
        };
        let weights = RiccatiWeights::new(schedule)?;
        Self::general_with_weights(schedule, &weights, d_value)
    }

    /// As [`RiccatiSequence::general`] with a precomputed weight cache.
    pub fn general_with_weights(
        schedule: &RateSchedule,
        weights: &RiccatiWeights,
        d_value: f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(schedule.last_state());
        for n in 0..schedule.last_state() {
            let prev = n as isize - 1;
            let denom = d_value - weights.partial_sum(prev);
            if denom == 0.0 {
                return Err(Error::DegenerateDenominator { index: n });
            }
            values.push(particular_value(schedule, n) + weights.correction(prev, denom));
        }
        Ok(Self {
            values,
            schedule_label: schedule.label().to_string(),
        })
    }

    /// Reads the sequence off a strictly positive distribution:
    /// `y_{n-1} = p_{n-1}/p_n + (1 - sigma_n)/b_{n-1}` for `n` in `[1, N]`.
    pub fn from_distribution(p: &Distribution, schedule: &RateSchedule) -> Result<Self> {
        let n_max = schedule.last_state();
        if p.last_state() != n_max {
            return Err(Error::DimensionMismatch {
                expected: n_max + 1,
                got: p.len(),
            });
        }
        for n in 0..=n_max {
            if p.p(n) <= 0.0 {
                return Err(Error::NonpositiveProbability { state: n });
            }
        }
        let values = (1..=n_max)
            .map(|n| {
                let ni = n as isize;
                p.p(n - 1) / p.p(n) + (1.0 - schedule.sigma(n)) / schedule.birth(ni - 1)
            })
            .collect();
        Ok(Self {
            values,
            schedule_label: schedule.label().to_string(),
        })
    }

    /// Builds the distribution generated by this sequence, normalized to
    /// total mass one. Fails with [`Error::NonpositivePivot`] when the
    /// sequence does not generate a positive distribution.
    pub fn to_distribution(&self, schedule: &RateSchedule) -> Result<Distribution> {
        let n_max = schedule.last_state();
        if self.values.len() != n_max {
            return Err(Error::DimensionMismatch {
                expected: n_max,
                got: self.values.len(),
            });
        }
        let mut weights = Vec::with_capacity(n_max + 1);
        weights.push(1.0);
        for n in 0..n_max {
            let pivot = self.values[n] + (schedule.sigma(n + 1) - 1.0) / schedule.birth(n as isize);
            if pivot <= 0.0 || pivot.is_nan() {
                return Err(Error::NonpositivePivot {
                    index: n,
                    value: pivot,
                });
            }
            weights.push(weights[n] / pivot);
        }
        Ok(Distribution::from_weights(
            weights,
            Provenance::RiccatiReconstruction,
        ))
    }

    /// Residual of the Riccati recurrence at `n` in `[1, N-1]`:
    ///
    /// ```text
    /// y_n - [ b_{n-1} y_n y_{n-1} - (b_{n-1}/b_n)(1 - sigma_{n+1}) y_{n-1}
    ///         + d_{n+1} + (1 - sigma_{n+1})/b_n ]
    /// ```
    ///
    /// Zero means the sequence satisfies the recurrence at that index.
    pub fn residual_at(&self, schedule: &RateSchedule, n: usize) -> Result<f64> {
        if n < 1 || n >= self.values.len() {
            return Err(Error::IndexOutOfRange {
                index: n,
                min: 1,
                max: self.values.len().saturating_sub(1),
            });
        }
        let ni = n as isize;
        let b_prev = schedule.birth(ni - 1);
        let b_cur = schedule.birth(ni);
        let one_minus_sigma = 1.0 - schedule.sigma(n + 1);
        let y_prev = self.values[n - 1];
        let y_cur = self.values[n];
        let rhs = b_prev * y_cur * y_prev - (b_prev / b_cur) * one_minus_sigma * y_prev
            + schedule.death(ni + 1)
            + one_minus_sigma / b_cur;
        Ok(y_cur - rhs)
    }

    /// Largest absolute residual over all interior indices.
    pub fn max_residual(&self, schedule: &RateSchedule) -> f64 {
        (1..self.values.len())
            .map(|n| self.residual_at(schedule, n).expect("index in range").abs())
            .fold(0.0, f64::max)
    }

    pub fn value(&self, n: usize) -> f64 {
        self.values[n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn schedule_label(&self) -> &str {
        &self.schedule_label
    }
}
