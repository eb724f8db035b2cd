//! Master-equation dynamics on the finite chain: the tridiagonal generator,
//! an independent null-space stationary oracle, stationarity residuals, time
//! evolution, and the bond probability current.
//!
//! The upper boundary is reflecting: inside the generator the birth rate out
//! of the last state is zero, which is the convention under which the
//! normalized stationary formulas are exact null vectors of the finite
//! chain.

use crate::error::{Error, Result};
use crate::schedule::RateSchedule;
use crate::stationary::{Distribution, Provenance};

/// Fraction of the inverse maximum outflow used as the stability bound for
/// the fixed-step integrator.
const STEP_SAFETY: f64 = 0.1;

/// Tridiagonal rate matrix of the chain on states `0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    n_max: usize,
    /// Rate of the jump `n-1 -> n` (`= b_{n-1}`), for `n` in `[1, N]`.
    sub: Vec<f64>,
    /// Total outflow per state, with boundary adjustments:
    /// `diag(0) = b_0`, `diag(N) = d_N`, otherwise `b_n + d_n`.
    diag: Vec<f64>,
    /// Rate of the jump `n+1 -> n` (`= d_{n+1}`), for `n` in `[0, N-1]`.
    sup: Vec<f64>,
}

impl Generator {
    pub fn from_schedule(schedule: &RateSchedule) -> Self {
        let n_max = schedule.last_state();
        let sub = (0..n_max).map(|k| schedule.birth(k as isize)).collect();
        let sup = (0..n_max).map(|k| schedule.death(k as isize + 1)).collect();
        let mut diag = Vec::with_capacity(n_max + 1);
        diag.push(schedule.sigma(0)); // d_0 = 0 by convention
        for n in 1..n_max {
            diag.push(schedule.sigma(n));
        }
        diag.push(schedule.death(n_max as isize)); // reflecting: b_N -> 0
        Self {
            n_max,
            sub,
            diag,
            sup,
        }
    }

    pub fn last_state(&self) -> usize {
        self.n_max
    }

    /// Entry for the jump `n-1 -> n`, `n` in `[1, N]`.
    pub fn sub(&self, n: usize) -> f64 {
        self.sub[n - 1]
    }

    pub fn diag(&self, n: usize) -> f64 {
        self.diag[n]
    }

    /// Entry for the jump `n+1 -> n`, `n` in `[0, N-1]`.
    pub fn sup(&self, n: usize) -> f64 {
        self.sup[n]
    }

    /// `out = L p`, the right-hand side of the master equation.
    pub fn apply(&self, p: &[f64], out: &mut [f64]) {
        assert_eq!(p.len(), self.n_max + 1);
        assert_eq!(out.len(), self.n_max + 1);
        for n in 0..=self.n_max {
            let mut v = -self.diag[n] * p[n];
            if n < self.n_max {
                v += self.sup[n] * p[n + 1];
            }
            if n > 0 {
                v += self.sub[n - 1] * p[n - 1];
            }
            out[n] = v;
        }
    }

    /// Largest absolute component of `L p`; zero for a stationary vector.
    pub fn stationarity_residual(&self, p: &Distribution) -> Result<f64> {
        if p.len() != self.n_max + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.n_max + 1,
                got: p.len(),
            });
        }
        let mut out = vec![0.0; self.n_max + 1];
        self.apply(p.probabilities(), &mut out);
        Ok(out.iter().fold(0.0, |a, v| a.max(v.abs())))
    }

    /// The unique normalized null vector of an irreducible generator,
    /// obtained by forward elimination of the three-term stationarity
    /// recurrence. This is the independent oracle against which the
    /// product-form solutions are checked.
    pub fn null_space_stationary(&self) -> Result<Distribution> {
        for (k, &v) in self.sub.iter().enumerate() {
            if v <= 0.0 {
                return Err(Error::ReducibleChain {
                    which: "sub",
                    index: k + 1,
                });
            }
        }
        for (k, &v) in self.sup.iter().enumerate() {
            if v <= 0.0 {
                return Err(Error::ReducibleChain {
                    which: "super",
                    index: k,
                });
            }
        }
        let mut w = Vec::with_capacity(self.n_max + 1);
        w.push(1.0);
        if self.n_max >= 1 {
            w.push(self.diag[0] / self.sup[0]);
        }
        for n in 1..self.n_max {
            let next = (self.diag[n] * w[n] - self.sub[n - 1] * w[n - 1]) / self.sup[n];
            w.push(next);
        }
        Ok(Distribution::from_weights(w, Provenance::Oracle))
    }

    /// Largest total outflow, which bounds the stiffness of the system.
    pub fn max_outflow(&self) -> f64 {
        self.diag.iter().fold(0.0, |a: f64, &v| a.max(v))
    }

    /// Largest admissible step of [`Generator::evolve`].
    pub fn stable_step(&self) -> f64 {
        STEP_SAFETY / self.max_outflow()
    }

    /// Integrates `dp/dt = L p` from `p0` to `t_final` with the classical
    /// fixed-step fourth-order scheme (plus one shortened final step to land
    /// exactly on `t_final`). The step must satisfy `dt <= stable_step()`.
    pub fn evolve(&self, p0: &Distribution, t_final: f64, dt: f64) -> Result<Distribution> {
        if p0.len() != self.n_max + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.n_max + 1,
                got: p0.len(),
            });
        }
        if dt <= 0.0 || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!("bad step dt = {dt}")));
        }
        let bound = self.stable_step();
        if dt > bound {
            return Err(Error::UnstableStep { dt, max_dt: bound });
        }
        if t_final < 0.0 || !t_final.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bad horizon t_final = {t_final}"
            )));
        }
        if (p0.total() - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidParameter(
                "initial distribution is not normalized".to_string(),
            ));
        }

        let dim = self.n_max + 1;
        let mut p = p0.probabilities().to_vec();
        let mut k1 = vec![0.0; dim];
        let mut k2 = vec![0.0; dim];
        let mut k3 = vec![0.0; dim];
        let mut k4 = vec![0.0; dim];
        let mut tmp = vec![0.0; dim];

        let full_steps = (t_final / dt).floor() as u64;
        let remainder = t_final - full_steps as f64 * dt;

        let mut step = |p: &mut Vec<f64>, h: f64| {
            self.apply(p, &mut k1);
            for i in 0..dim {
                tmp[i] = p[i] + 0.5 * h * k1[i];
            }
            self.apply(&tmp, &mut k2);
            for i in 0..dim {
                tmp[i] = p[i] + 0.5 * h * k2[i];
            }
            self.apply(&tmp, &mut k3);
            for i in 0..dim {
                tmp[i] = p[i] + h * k3[i];
            }
            self.apply(&tmp, &mut k4);
            for i in 0..dim {
                p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        };

        for _ in 0..full_steps {
            step(&mut p, dt);
        }
        if remainder > 0.0 {
            step(&mut p, remainder);
        }

        // no renormalization: conservation is an observable property of the
        // integrator, not something to enforce after the fact
        Ok(Distribution::from_raw(p, 1.0, Provenance::Evolved))
    }
}

/// Net probability flow across the bond between `n-1` and `n`:
/// `J_n = b_{n-1} p_{n-1} - d_n p_n`, for `n` in `[1, N]`. Detailed balance
/// makes every bond current vanish.
pub fn probability_current(
    schedule: &RateSchedule,
    p: &Distribution,
    n: usize,
) -> Result<f64> {
    let n_max = schedule.last_state();
    if p.len() != n_max + 1 {
        return Err(Error::DimensionMismatch {
            expected: n_max + 1,
            got: p.len(),
        });
    }
    if n < 1 || n > n_max {
        return Err(Error::IndexOutOfRange {
            index: n,
            min: 1,
            max: n_max,
        });
    }
    let ni = n as isize;
    Ok(schedule.birth(ni - 1) * p.p(n - 1) - schedule.death(ni) * p.p(n))
}
