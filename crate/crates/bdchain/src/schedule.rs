//! Birth-death rate schedules.
//!
//! A [`RateSchedule`] holds the birth rates `b_i` and death rates `d_i` of a
//! finite nearest-neighbour chain on states `0..=N`. By convention the
//! accessors return `b(-1) = 0` and `d(0) = 0`; these boundary values are
//! never stored. Rates are stored beyond the last state (`b` up to `N+1`,
//! `d` up to `N+2`) because the Riccati weight products and their partial
//! sums reference `b_{i+1}` and `d_{i+2}` for `i` up to `N-1`.
//!
//! Schedules are immutable after construction and safe to share across
//! threads.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Birth and death rates of a finite chain on states `0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSchedule {
    n_max: usize,
    /// Stored births for indices `0..=N+1`.
    b: Vec<f64>,
    /// Stored deaths for indices `0..=N+2` (the slot at 0 is masked by the
    /// accessor and never enters any formula).
    d: Vec<f64>,
    label: String,
}

impl RateSchedule {
    /// Constant rates `b_i = d_i = b_val` with `0 < b_val < 1`.
    pub fn constant(b_val: f64, n_max: usize) -> Result<Self> {
        if !(b_val > 0.0 && b_val < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "constant rate must lie in (0, 1), got {b_val}"
            )));
        }
        check_n_max(n_max)?;
        let b = vec![b_val; n_max + 2];
        let d = vec![b_val; n_max + 3];
        Self::assemble(b, d, n_max, "constant".to_string())
    }

    /// Constant asymmetric rates `b_i = (1 + eps)/2`, `d_i = (1 - eps)/2`.
    ///
    /// The label records `eps` and the derived ratio `q = (1 - eps)/(1 + eps)`.
    pub fn asymmetric(epsilon: f64, n_max: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        check_n_max(n_max)?;
        let b_val = 0.5 * (1.0 + epsilon);
        let d_val = 0.5 * (1.0 - epsilon);
        let q = d_val / b_val;
        let b = vec![b_val; n_max + 2];
        let d = vec![d_val; n_max + 3];
        Self::assemble(b, d, n_max, format!("asymmetric(eps={epsilon}, q={q})"))
    }

    /// Offset-exponential rates `b_i = c_b + exp(-alpha_b * i^power)` and
    /// `d_i = c_d + exp(-alpha_d * i^power)` with `power` either 1 or 1/2.
    pub fn offset_exponential(
        c_b: f64,
        alpha_b: f64,
        c_d: f64,
        alpha_d: f64,
        power: f64,
        n_max: usize,
    ) -> Result<Self> {
        if !(c_b >= 0.0 && c_d >= 0.0) || !c_b.is_finite() || !c_d.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "offsets must be finite and nonnegative, got c_b={c_b}, c_d={c_d}"
            )));
        }
        if !(alpha_b > 0.0 && alpha_d > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "decay constants must be positive, got alpha_b={alpha_b}, alpha_d={alpha_d}"
            )));
        }
        if power != 1.0 && power != 0.5 {
            return Err(Error::InvalidParameter(format!(
                "power must be 1 or 1/2, got {power}"
            )));
        }
        check_n_max(n_max)?;
        let rate = |c: f64, alpha: f64, i: usize| c + (-alpha * (i as f64).powf(power)).exp();
        let b: Vec<f64> = (0..=n_max + 1).map(|i| rate(c_b, alpha_b, i)).collect();
        let d: Vec<f64> = (0..=n_max + 2).map(|i| rate(c_d, alpha_d, i)).collect();
        let label = if power == 1.0 {
            format!("offset_exp(b_i={c_b}+exp(-{alpha_b} i), d_i={c_d}+exp(-{alpha_d} i))")
        } else {
            format!("offset_exp(b_i={c_b}+exp(-{alpha_b} sqrt(i)), d_i={c_d}+exp(-{alpha_d} sqrt(i)))")
        };
        Self::assemble(b, d, n_max, label)
    }

    /// Explicit rate arrays, taken verbatim. `b` must cover indices
    /// `0..=N+1` and `d` indices `0..=N+2`; longer arrays are truncated.
    pub fn from_arrays(
        b: Vec<f64>,
        d: Vec<f64>,
        n_max: usize,
        label: impl Into<String>,
    ) -> Result<Self> {
        check_n_max(n_max)?;
        if b.len() < n_max + 2 {
            return Err(Error::RateArrayTooShort {
                which: "b",
                needed: n_max + 2,
                got: b.len(),
            });
        }
        if d.len() < n_max + 3 {
            return Err(Error::RateArrayTooShort {
                which: "d",
                needed: n_max + 3,
                got: d.len(),
            });
        }
        let mut b = b;
        let mut d = d;
        b.truncate(n_max + 2);
        d.truncate(n_max + 3);
        Self::assemble(b, d, n_max, label.into())
    }

    /// Builds a schedule from a parsed configuration document.
    pub fn from_config(cfg: &ScheduleConfig) -> Result<Self> {
        match cfg {
            ScheduleConfig::Constant { b, n } => Self::constant(*b, *n),
            ScheduleConfig::Asymmetric { epsilon, n } => Self::asymmetric(*epsilon, *n),
            ScheduleConfig::OffsetExponential {
                c_b,
                alpha_b,
                c_d,
                alpha_d,
                power,
                n,
            } => Self::offset_exponential(*c_b, *alpha_b, *c_d, *alpha_d, *power, *n),
            ScheduleConfig::Explicit { b, d, n, label } => Self::from_arrays(
                b.clone(),
                d.clone(),
                *n,
                label.clone().unwrap_or_else(|| "explicit".to_string()),
            ),
        }
    }

    /// Serializes the stored rates verbatim, so that
    /// `from_config(to_config(s))` reproduces `s` exactly.
    pub fn to_config(&self) -> ScheduleConfig {
        ScheduleConfig::Explicit {
            b: self.b.clone(),
            d: self.d.clone(),
            n: self.n_max,
            label: Some(self.label.clone()),
        }
    }

    fn assemble(b: Vec<f64>, d: Vec<f64>, n_max: usize, label: String) -> Result<Self> {
        for (idx, &v) in b.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::BadRate {
                    which: 'b',
                    index: idx,
                    value: v,
                    requirement: "finite and nonnegative",
                });
            }
            if idx < n_max && v == 0.0 {
                return Err(Error::BadRate {
                    which: 'b',
                    index: idx,
                    value: v,
                    requirement: "strictly positive for 0 <= i <= N-1",
                });
            }
        }
        for (idx, &v) in d.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::BadRate {
                    which: 'd',
                    index: idx,
                    value: v,
                    requirement: "finite and nonnegative",
                });
            }
            if (1..=n_max).contains(&idx) && v == 0.0 {
                return Err(Error::BadRate {
                    which: 'd',
                    index: idx,
                    value: v,
                    requirement: "strictly positive for 1 <= i <= N",
                });
            }
        }
        Ok(Self { n_max, b, d, label })
    }

    /// Index of the last chain state.
    pub fn last_state(&self) -> usize {
        self.n_max
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Birth rate `b_i` for `i` in `[-1, N+1]`; `b(-1) = 0` by convention.
    pub fn birth(&self, i: isize) -> f64 {
        if i == -1 {
            return 0.0;
        }
        assert!(
            (0..=self.n_max as isize + 1).contains(&i),
            "birth index {i} out of range [-1, {}]",
            self.n_max + 1
        );
        self.b[i as usize]
    }

    /// Death rate `d_i` for `i` in `[0, N+2]`; `d(0) = 0` by convention.
    pub fn death(&self, i: isize) -> f64 {
        if i == 0 {
            return 0.0;
        }
        assert!(
            (0..=self.n_max as isize + 2).contains(&i),
            "death index {i} out of range [0, {}]",
            self.n_max + 2
        );
        self.d[i as usize]
    }

    /// Total jump rate `sigma_n = b_n + d_n`, the exact sum of the two
    /// accessor values.
    pub fn sigma(&self, n: usize) -> f64 {
        self.birth(n as isize) + self.death(n as isize)
    }

    /// Evaluates the ratio condition `b_i/d_{i+1} >= b_{i-1}/d_i` at each
    /// interior index. The condition is sufficient for positivity of the
    /// parametric solution family but not necessary, so the report is
    /// advisory; actual positivity of a computed distribution is checked
    /// where the distribution is built.
    pub fn positivity_report(&self) -> PositivityReport {
        let mut checks = Vec::new();
        let mut all_hold = true;
        for i in 1..self.n_max {
            let i = i as isize;
            let lhs = self.birth(i) / self.death(i + 1);
            let rhs = self.birth(i - 1) / self.death(i);
            let holds = lhs >= rhs;
            all_hold &= holds;
            checks.push(PositivityCheck {
                index: i as usize,
                lhs,
                rhs,
                holds,
            });
        }
        PositivityReport {
            checks,
            all_hold,
            advisory: true,
        }
    }
}

fn check_n_max(n_max: usize) -> Result<()> {
    if n_max < 1 {
        return Err(Error::InvalidParameter(
            "the chain needs at least two states (N >= 1)".to_string(),
        ));
    }
    Ok(())
}

/// One evaluation of the ratio condition at an interior index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositivityCheck {
    pub index: usize,
    /// `b_i / d_{i+1}`
    pub lhs: f64,
    /// `b_{i-1} / d_i`
    pub rhs: f64,
    pub holds: bool,
}

/// Result of [`RateSchedule::positivity_report`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityReport {
    pub checks: Vec<PositivityCheck>,
    /// Conjunction of all per-index checks.
    pub all_hold: bool,
    /// Always true: a failing report does not reject the schedule.
    pub advisory: bool,
}

/// Self-describing schedule configuration, the on-disk format understood by
/// the CLI. Field names are part of the CLI contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleConfig {
    Constant {
        b: f64,
        #[serde(rename = "N")]
        n: usize,
    },
    Asymmetric {
        epsilon: f64,
        #[serde(rename = "N")]
        n: usize,
    },
    OffsetExponential {
        c_b: f64,
        alpha_b: f64,
        c_d: f64,
        alpha_d: f64,
        power: f64,
        #[serde(rename = "N")]
        n: usize,
    },
    Explicit {
        b: Vec<f64>,
        d: Vec<f64>,
        #[serde(rename = "N")]
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
}

impl ScheduleConfig {
    /// Human-readable description of the rate formulas, used in CSV metadata.
    pub fn describe_rates(&self) -> String {
        match self {
            ScheduleConfig::Constant { b, .. } => format!("b_i = d_i = {b}"),
            ScheduleConfig::Asymmetric { epsilon, .. } => {
                let b = 0.5 * (1.0 + epsilon);
                let d = 0.5 * (1.0 - epsilon);
                format!("b_i = {b}, d_i = {d} (eps = {epsilon})")
            }
            ScheduleConfig::OffsetExponential {
                c_b,
                alpha_b,
                c_d,
                alpha_d,
                power,
                ..
            } => {
                let ix = if *power == 1.0 { "i" } else { "sqrt(i)" };
                format!("b_i = {c_b} + exp(-{alpha_b} {ix}), d_i = {c_d} + exp(-{alpha_d} {ix})")
            }
            ScheduleConfig::Explicit { label, .. } => label
                .clone()
                .unwrap_or_else(|| "explicit rate arrays".to_string()),
        }
    }
}
