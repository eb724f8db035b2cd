//! Stationary distributions: the classical solution, the one-parameter
//! family obtained from the Riccati route, closed forms for constant and
//! constant-asymmetric rates, and the effective (renormalized) schedule for
//! which a family member satisfies detailed balance.

use crate::error::{Error, Result};
use crate::riccati::{DParam, RiccatiWeights};
use crate::schedule::RateSchedule;

/// Which formula produced a distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    Classical,
    Parametric(DParam),
    ClosedFormConstant(DParam),
    ClosedFormAsymmetric(DParam),
    /// Rebuilt from a Riccati sequence via the probability-ratio recurrence.
    RiccatiReconstruction,
    /// Independent computation route (generator null space).
    Oracle,
    /// Time-evolved state.
    Evolved,
    /// Occupation fractions measured from a stochastic trajectory.
    Empirical,
}

/// A normalized probability vector over chain states `0..=N` together with
/// the normalization prefactor of the generating formula.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    p: Vec<f64>,
    norm_constant: f64,
    provenance: Provenance,
}

impl Distribution {
    /// Normalizes nonnegative weights (with `w_0` conventionally 1) to total
    /// mass one; the recorded normalization constant is `1 / sum(w)`.
    pub fn from_weights(weights: Vec<f64>, provenance: Provenance) -> Self {
        let sum: f64 = weights.iter().sum();
        let p = weights.iter().map(|w| w / sum).collect();
        Self {
            p,
            norm_constant: 1.0 / sum,
            provenance,
        }
    }

    /// Wraps an already-normalized vector without renormalizing, so that
    /// conservation checks observe the vector as produced.
    pub(crate) fn from_raw(p: Vec<f64>, norm_constant: f64, provenance: Provenance) -> Self {
        Self {
            p,
            norm_constant,
            provenance,
        }
    }

    /// All mass on one state.
    pub fn point_mass(state: usize, n_max: usize) -> Self {
        assert!(state <= n_max, "state {state} beyond last state {n_max}");
        let mut w = vec![0.0; n_max + 1];
        w[state] = 1.0;
        Self {
            p: w,
            norm_constant: 1.0,
            provenance: Provenance::Empirical,
        }
    }

    pub fn p(&self, n: usize) -> f64 {
        self.p[n]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn last_state(&self) -> usize {
        self.p.len() - 1
    }

    pub fn norm_constant(&self) -> f64 {
        self.norm_constant
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn min_probability(&self) -> f64 {
        self.p.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }
}

/// Classical stationary distribution `p_n = P_0 prod_{j<n} b_j / d_{j+1}`.
pub fn classical_stationary(schedule: &RateSchedule) -> Distribution {
    let n_max = schedule.last_state();
    let mut weights = Vec::with_capacity(n_max + 1);
    weights.push(1.0);
    for n in 1..=n_max {
        let ni = n as isize;
        weights.push(weights[n - 1] * schedule.birth(ni - 1) / schedule.death(ni));
    }
    Distribution::from_weights(weights, Provenance::Classical)
}

/// Per-index renormalization factors
/// `r_i = 1 + u_i / (|D| + S_i - u_i)` with `u_i = f_i b_i / d_{i+1}`,
/// for `i` in `[0, N-1]`. The limit case yields all ones.
fn renormalization_factors_with(
    schedule: &RateSchedule,
    weights: &RiccatiWeights,
    d: DParam,
) -> Result<Vec<f64>> {
    let n_max = schedule.last_state();
    let d_abs = match d.abs() {
        None => return Ok(vec![1.0; n_max]),
        Some(v) => v,
    };
    let mut factors = Vec::with_capacity(n_max);
    for i in 0..n_max {
        let ii = i as isize;
        let u = weights.scaled_product(ii, schedule.birth(ii), schedule.death(ii + 1));
        let denom = d_abs + weights.partial_sum(ii) - u;
        if denom <= 0.0 || denom.is_nan() {
            return Err(Error::NonpositiveDenominator {
                index: i,
                value: denom,
            });
        }
        factors.push(1.0 + u / denom);
    }
    Ok(factors)
}

/// All renormalization factors for a (schedule, D) pair.
pub fn renormalization_factors(schedule: &RateSchedule, d: DParam) -> Result<Vec<f64>> {
    let weights = RiccatiWeights::new(schedule)?;
    renormalization_factors_with(schedule, &weights, d)
}

/// The factor at a single index `i` in `[0, N-1]`.
pub fn renormalization_factor(schedule: &RateSchedule, d: DParam, i: usize) -> Result<f64> {
    if i >= schedule.last_state() {
        return Err(Error::IndexOutOfRange {
            index: i,
            min: 0,
            max: schedule.last_state() - 1,
        });
    }
    if d.is_neg_inf() {
        return Ok(1.0);
    }
    let weights = RiccatiWeights::new(schedule)?;
    let ii = i as isize;
    let d_abs = d.abs().expect("finite");
    let u = weights.scaled_product(ii, schedule.birth(ii), schedule.death(ii + 1));
    let denom = d_abs + weights.partial_sum(ii) - u;
    if denom <= 0.0 || denom.is_nan() {
        return Err(Error::NonpositiveDenominator {
            index: i,
            value: denom,
        });
    }
    Ok(1.0 + u / denom)
}

/// The one-parameter stationary family
/// `p_n(D) = P~_0 prod_{i<n} (b_i / d_{i+1}) r_i(D)`, accumulated left to
/// right in tandem with the classical product. The limit case returns the
/// classical distribution exactly.
///
/// Fails with [`Error::NonpositiveDenominator`] when some factor denominator
/// is not strictly positive: this (schedule, D) pair has no positive family
/// member.
pub fn parametric_stationary(schedule: &RateSchedule, d: DParam) -> Result<Distribution> {
    if d.is_neg_inf() {
        return Ok(classical_stationary(schedule).with_provenance(Provenance::Parametric(d)));
    }
    let weights = RiccatiWeights::new(schedule)?;
    let factors = renormalization_factors_with(schedule, &weights, d)?;
    let n_max = schedule.last_state();
    let mut w = Vec::with_capacity(n_max + 1);
    w.push(1.0);
    for (i, r) in factors.iter().enumerate() {
        let ii = i as isize;
        w.push(w[i] * (schedule.birth(ii) / schedule.death(ii + 1)) * r);
    }
    Ok(Distribution::from_weights(w, Provenance::Parametric(d)))
}

/// The modified schedule `b'_i = b_i r_i(D)`, `d' = d`, for which the family
/// member at `D` satisfies detailed balance. Stored birth rates beyond the
/// factor range (`i >= N`) are kept unchanged; they never enter the chain on
/// `0..=N`. The limit case returns the schedule unchanged (all factors one).
pub fn effective_schedule(schedule: &RateSchedule, d: DParam) -> Result<RateSchedule> {
    let n_max = schedule.last_state();
    let factors = renormalization_factors(schedule, d)?;
    let mut b: Vec<f64> = (0..=n_max as isize + 1).map(|i| schedule.birth(i)).collect();
    for (i, r) in factors.iter().enumerate() {
        b[i] *= r;
    }
    let mut dd: Vec<f64> = Vec::with_capacity(n_max + 3);
    dd.push(0.0);
    dd.extend((1..=n_max as isize + 2).map(|i| schedule.death(i)));
    RateSchedule::from_arrays(
        b,
        dd,
        n_max,
        format!("{} (effective, D={d})", schedule.label()),
    )
}

/// Closed-form family member for constant rates `b_i = d_i = b_val`:
/// `p_k = (1/(N+1)) (1 + k/|D|) / (1 + N/(2|D|))`, independent of `b_val`.
/// The limit case is uniform.
pub fn constant_closed_form(b_val: f64, n_max: usize, d: DParam) -> Result<Distribution> {
    if !(b_val > 0.0 && b_val < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "constant rate must lie in (0, 1), got {b_val}"
        )));
    }
    if n_max < 1 {
        return Err(Error::InvalidParameter("need N >= 1".to_string()));
    }
    let weights: Vec<f64> = match d.abs() {
        None => vec![1.0; n_max + 1],
        Some(d_abs) => (0..=n_max).map(|k| 1.0 + k as f64 / d_abs).collect(),
    };
    Ok(Distribution::from_weights(
        weights,
        Provenance::ClosedFormConstant(d),
    ))
}

/// Closed-form family member for the constant asymmetric schedule with
/// `q = (1 - eps)/(1 + eps)`:
///
/// ```text
/// p_n = P~_0 q^{-n} prod_{i<n} [ (1-q)(|D| + q^i) + 1 - q^i ]
///                            / [ (1-q)|D| + 1 - q^i ]
/// ```
///
/// normalized by direct summation. The limit case is `p_n ~ q^{-n}`.
pub fn asymmetric_closed_form(epsilon: f64, n_max: usize, d: DParam) -> Result<Distribution> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if n_max < 1 {
        return Err(Error::InvalidParameter("need N >= 1".to_string()));
    }
    let q = (1.0 - epsilon) / (1.0 + epsilon);
    let mut weights = Vec::with_capacity(n_max + 1);
    weights.push(1.0);
    match d.abs() {
        None => {
            for n in 1..=n_max {
                weights.push(weights[n - 1] / q);
            }
        }
        Some(d_abs) => {
            for n in 1..=n_max {
                let i = (n - 1) as i32;
                let qi = q.powi(i);
                let num = (1.0 - q) * (d_abs + qi) + 1.0 - qi;
                let den = (1.0 - q) * d_abs + 1.0 - qi;
                if den <= 0.0 || den.is_nan() {
                    return Err(Error::DegenerateDenominator { index: n - 1 });
                }
                weights.push(weights[n - 1] * num / (q * den));
            }
        }
    }
    Ok(Distribution::from_weights(
        weights,
        Provenance::ClosedFormAsymmetric(d),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riccati::RiccatiSequence;

    fn d(v: f64) -> DParam {
        DParam::finite(v).unwrap()
    }

    #[test]
    fn classical_constant_is_uniform() {
        let s = RateSchedule::constant(0.5, 20).unwrap();
        let p = classical_stationary(&s);
        for n in 0..=20 {
            assert!((p.p(n) - 1.0 / 21.0).abs() < 1e-15);
        }
        assert!((p.total() - 1.0).abs() < 1e-12);
        assert!((p.norm_constant() - 1.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn classical_asymmetric_is_geometric() {
        let s = RateSchedule::asymmetric(0.3, 30).unwrap();
        let p = classical_stationary(&s);
        let q = 0.35f64 / 0.65f64;
        // direct product oracle: each ratio b/d = 1/q
        for n in 1..=30 {
            assert!((p.p(n) / p.p(n - 1) - 1.0 / q).abs() < 1e-12);
        }
    }

    #[test]
    fn parametric_small_constant_example() {
        // b = 0.5, N = 2, |D| = 2: weights (1, 1.5, 2) -> (2/9, 1/3, 4/9)
        let s = RateSchedule::constant(0.5, 2).unwrap();
        let p = parametric_stationary(&s, d(-2.0)).unwrap();
        assert!((p.p(0) - 2.0 / 9.0).abs() < 1e-15);
        assert!((p.p(1) - 3.0 / 9.0).abs() < 1e-15);
        assert!((p.p(2) - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn parametric_limit_equals_classical_exactly() {
        let s = RateSchedule::offset_exponential(0.1, 0.12, 0.1, 0.15, 1.0, 60).unwrap();
        let p = parametric_stationary(&s, DParam::NegInf).unwrap();
        let c = classical_stationary(&s);
        assert_eq!(p.probabilities(), c.probabilities());
        assert_eq!(p.provenance(), Provenance::Parametric(DParam::NegInf));
    }

    #[test]
    fn parametric_matches_constant_closed_form() {
        let s = RateSchedule::constant(0.5, 20).unwrap();
        for d_abs in [1000.0, 2000.0] {
            let p = parametric_stationary(&s, d(-d_abs)).unwrap();
            let c = constant_closed_form(0.5, 20, d(-d_abs)).unwrap();
            for k in 0..=20 {
                assert!((p.p(k) - c.p(k)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn parametric_matches_asymmetric_closed_form() {
        let s = RateSchedule::asymmetric(0.02, 100).unwrap();
        for d_abs in [4.0, 40.0] {
            let p = parametric_stationary(&s, d(-d_abs)).unwrap();
            let c = asymmetric_closed_form(0.02, 100, d(-d_abs)).unwrap();
            for n in 0..=100 {
                assert!(
                    (p.p(n) - c.p(n)).abs() <= 1e-12,
                    "mismatch at n={n}, |D|={d_abs}"
                );
            }
        }
    }

    #[test]
    fn renormalization_factor_values() {
        let s = RateSchedule::constant(0.5, 10).unwrap();
        // f_0 = 1, S_0 = 1, u_0 = 1: r_0 = 1 + 1/(1000 + 1 - 1)
        let r = renormalization_factor(&s, d(-1000.0), 0).unwrap();
        assert!((r - 1.001).abs() < 1e-15);
        assert_eq!(
            renormalization_factor(&s, DParam::NegInf, 3).unwrap(),
            1.0
        );
        assert!(renormalization_factor(&s, d(-4.0), 10).is_err());
    }

    #[test]
    fn renormalization_factors_reproduce_distribution_ratio() {
        let s = RateSchedule::offset_exponential(0.01, 0.15, 0.01, 0.12, 1.0, 50).unwrap();
        let dp = d(-4.0);
        let factors = renormalization_factors(&s, dp).unwrap();
        assert!(factors.iter().all(|&r| r > 0.0 && r.is_finite()));
        let p = parametric_stationary(&s, dp).unwrap();
        let c = classical_stationary(&s);
        let mut product = 1.0;
        for n in 1..=50 {
            product *= factors[n - 1];
            let ratio = (p.p(n) / c.p(n)) * (c.norm_constant() / p.norm_constant());
            assert!(
                (ratio / product - 1.0).abs() < 1e-10,
                "ratio mismatch at n={n}"
            );
        }
    }

    #[test]
    fn effective_schedule_limit_is_identity() {
        let s = RateSchedule::asymmetric(0.02, 40).unwrap();
        let eff = effective_schedule(&s, DParam::NegInf).unwrap();
        for i in 0..=41 {
            assert_eq!(eff.birth(i), s.birth(i));
        }
        for i in 1..=42 {
            assert_eq!(eff.death(i), s.death(i));
        }
    }

    #[test]
    fn effective_schedule_constant_formula() {
        // b'_k = b (1 + 1/(|D| + k)) for constant rates
        let s = RateSchedule::constant(0.5, 20).unwrap();
        let eff = effective_schedule(&s, d(-1000.0)).unwrap();
        for k in 0..20isize {
            let expect = 0.5 * (1.0 + 1.0 / (1000.0 + k as f64));
            assert!((eff.birth(k) - expect).abs() < 1e-14);
            assert_eq!(eff.death(k + 1), 0.5);
        }
    }

    #[test]
    fn detailed_balance_of_effective_schedule() {
        for (s, d_abs) in [
            (RateSchedule::constant(0.5, 20).unwrap(), 1000.0),
            (RateSchedule::asymmetric(0.02, 100).unwrap(), 40.0),
            (
                RateSchedule::offset_exponential(0.01, 0.15, 0.01, 0.12, 1.0, 100).unwrap(),
                4.0,
            ),
        ] {
            let dp = d(-d_abs);
            let p = parametric_stationary(&s, dp).unwrap();
            let eff = effective_schedule(&s, dp).unwrap();
            for n in 0..s.last_state() {
                let ni = n as isize;
                let lhs = p.p(n + 1) * eff.death(ni + 1);
                let rhs = p.p(n) * eff.birth(ni);
                assert!(
                    ((lhs - rhs) / rhs).abs() <= 1e-12,
                    "detailed balance violated at n={n} for {}",
                    s.label()
                );
            }
        }
    }

    #[test]
    fn constant_closed_form_values() {
        let p = constant_closed_form(0.5, 2, d(-2.0)).unwrap();
        assert!((p.p(0) - 2.0 / 9.0).abs() < 1e-15);
        assert!((p.p(1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((p.p(2) - 4.0 / 9.0).abs() < 1e-15);

        let u = constant_closed_form(0.5, 20, DParam::NegInf).unwrap();
        for k in 0..=20 {
            assert!((u.p(k) - 1.0 / 21.0).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_closed_form_slope_ordering() {
        // shallower slope for more negative D; exact value 1/(N+1) at N/2
        let p1000 = constant_closed_form(0.5, 20, d(-1000.0)).unwrap();
        let p2000 = constant_closed_form(0.5, 20, d(-2000.0)).unwrap();
        let slope = |p: &Distribution| p.p(1) - p.p(0);
        assert!(slope(&p1000) > slope(&p2000));
        assert!(slope(&p2000) > 0.0);
        assert!((p1000.p(10) - 1.0 / 21.0).abs() < 1e-15);
        assert!((p2000.p(10) - 1.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn constant_slope_equals_norm_constant_over_d() {
        let dp = d(-1000.0);
        let p = constant_closed_form(0.5, 20, dp).unwrap();
        // least-squares slope of an exactly affine sequence
        let n = 21.0;
        let ks: Vec<f64> = (0..21).map(|k| k as f64).collect();
        let mean_k = ks.iter().sum::<f64>() / n;
        let mean_p = p.total() / n;
        let cov: f64 = ks.iter().zip(p.probabilities()).map(|(k, v)| (k - mean_k) * (v - mean_p)).sum();
        let var: f64 = ks.iter().map(|k| (k - mean_k) * (k - mean_k)).sum();
        let slope = cov / var;
        assert!((slope - p.norm_constant() / 1000.0).abs() <= 1e-10);
    }

    #[test]
    fn asymmetric_closed_form_limit_ratio() {
        let p = asymmetric_closed_form(0.02, 50, DParam::NegInf).unwrap();
        let q = 0.49f64 / 0.51f64;
        for n in 1..=50 {
            assert!((p.p(n) / p.p(n - 1) - 1.0 / q).abs() < 1e-12);
        }
    }

    #[test]
    fn asymmetric_closed_form_degenerates_to_constant_case() {
        // eps -> 0 at fixed |D| approaches the constant-rate closed form;
        // the deviation is linear in eps (measured constant ~0.65 at
        // N = 20, |D| = 4)
        let c = constant_closed_form(0.5, 20, d(-4.0)).unwrap();
        let max_diff = |eps: f64| {
            let a = asymmetric_closed_form(eps, 20, d(-4.0)).unwrap();
            (0..=20)
                .map(|n| (a.p(n) - c.p(n)).abs())
                .fold(0.0, f64::max)
        };
        assert!(max_diff(1e-6) < 1e-6);
        let ratio = max_diff(1e-4) / max_diff(1e-5);
        assert!((ratio - 10.0).abs() < 0.5, "not linear in eps: {ratio}");
    }

    #[test]
    fn deviation_from_classical_scales_as_one_over_d() {
        let s = RateSchedule::offset_exponential(0.1, 0.12, 0.1, 0.15, 1.0, 60).unwrap();
        let c = classical_stationary(&s);
        let max_dev = |d_abs: f64| {
            let p = parametric_stationary(&s, d(-d_abs)).unwrap();
            (0..=60)
                .map(|n| (p.p(n) - c.p(n)).abs())
                .fold(0.0, f64::max)
        };
        let (d6, d9) = (max_dev(1e6), max_dev(1e9));
        assert!(d9 < d6);
        let ratio = d6 / d9;
        assert!(
            (ratio - 1000.0).abs() < 50.0,
            "deviation not ~C/|D|: ratio {ratio}"
        );
    }

    #[test]
    fn nonpositive_denominator_fires_for_violating_schedule() {
        // strong ratio-condition violation at index 1 makes u_0 = 100
        // dominate |D| + S_0 for small |D|
        let b = vec![1.0, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1];
        let dd = vec![0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        let s = RateSchedule::from_arrays(b, dd, 5, "violating").unwrap();
        assert!(!s.positivity_report().all_hold);
        match parametric_stationary(&s, d(-4.0)) {
            Err(Error::NonpositiveDenominator { index, value }) => {
                assert_eq!(index, 0);
                assert!(value <= 0.0);
            }
            other => panic!("expected NonpositiveDenominator, got {other:?}"),
        }
        // a large |D| restores positivity
        let p = parametric_stationary(&s, d(-1e6)).unwrap();
        assert!(p.min_probability() > 0.0);
    }

    #[test]
    fn every_family_output_is_normalized_and_positive() {
        let schedules = [
            RateSchedule::constant(0.5, 20).unwrap(),
            RateSchedule::asymmetric(0.02, 100).unwrap(),
            RateSchedule::offset_exponential(0.1, 0.12, 0.1, 0.15, 1.0, 100).unwrap(),
            RateSchedule::offset_exponential(0.0, 0.12, 0.0, 0.15, 0.5, 100).unwrap(),
            RateSchedule::offset_exponential(0.01, 0.15, 0.01, 0.12, 1.0, 100).unwrap(),
        ];
        for s in &schedules {
            for dp in [d(-4.0), d(-1000.0), DParam::NegInf] {
                let p = parametric_stationary(s, dp).unwrap();
                assert!((p.total() - 1.0).abs() <= 1e-12, "norm for {}", s.label());
                assert!(p.min_probability() > 0.0, "positivity for {}", s.label());
            }
        }
    }

    #[test]
    fn family_ratio_identity_under_substitution() {
        // Reading the family member at D back through the probability-ratio
        // substitution gives y_n = y0_n + f_n / (D - S_n): the correction
        // terms of the general Riccati solution, each one slot later.
        let s = RateSchedule::offset_exponential(0.1, 0.12, 0.1, 0.15, 1.0, 50).unwrap();
        let dp = d(-4.0);
        let p = parametric_stationary(&s, dp).unwrap();
        let y = RiccatiSequence::from_distribution(&p, &s).unwrap();
        let w = RiccatiWeights::new(&s).unwrap();
        let y0 = RiccatiSequence::particular(&s);
        for n in 0..50isize {
            let expect = y0.value(n as usize) + w.product(n) / (-4.0 - w.partial_sum(n));
            assert!(
                (y.value(n as usize) - expect).abs() <= 1e-12,
                "substitution identity fails at n={n}"
            );
        }
        let general = RiccatiSequence::general(&s, dp).unwrap();
        for n in 0..49 {
            let from_family = y.value(n) - y0.value(n);
            let from_general = general.value(n + 1) - y0.value(n + 1);
            assert!(
                (from_family - from_general).abs() <= 1e-12,
                "correction-term bridge fails at n={n}"
            );
        }
    }
}
