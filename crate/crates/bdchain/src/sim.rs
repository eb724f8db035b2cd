//! Exact continuous-time stochastic simulation of the chain, used as a
//! sampling-based cross-check of the analytic stationary distributions.
//!
//! The sampler is the direct method: at state `n` the total jump rate is
//! `R = b_n [n < N] + d_n [n > 0]`, the waiting time is exponential with
//! rate `R`, and the jump goes up with probability `b_n / R`. Trajectories
//! are exactly reproducible from the recorded seed; the generator is
//! ChaCha8, fixed by name in the trajectory metadata so runs stay
//! comparable across platforms.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::schedule::RateSchedule;
use crate::stationary::{Distribution, Provenance};

/// Name of the pseudo-random generator backing [`gillespie_run`].
pub const RNG_ALGORITHM: &str = "chacha8";

/// One simulated path: the initial state plus every jump up to the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `(time, state)` records; the first entry is `(0, n0)`, later entries
    /// are jumps with strictly increasing times and states differing by one.
    events: Vec<(f64, u32)>,
    seed: u64,
    schedule_label: String,
    rng_algorithm: &'static str,
    n_max: usize,
    /// Requested horizon; occupation fractions weight dwell times up to it.
    t_final: f64,
    /// True when the chain reached a state with zero total rate and the run
    /// ended early.
    frozen: bool,
}

impl Trajectory {
    pub fn events(&self) -> &[(f64, u32)] {
        &self.events
    }

    pub fn n_jumps(&self) -> usize {
        self.events.len() - 1
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn schedule_label(&self) -> &str {
        &self.schedule_label
    }

    pub fn rng_algorithm(&self) -> &'static str {
        self.rng_algorithm
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn last_state(&self) -> usize {
        self.n_max
    }

    /// Time-weighted occupation fractions per state over
    /// `[burn_in, t_final]`. Dwell times, not jump counts, are what
    /// converge to the stationary distribution.
    pub fn empirical_stationary(&self, burn_in: f64) -> Result<Distribution> {
        if burn_in < 0.0 || burn_in.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "burn-in must be nonnegative, got {burn_in}"
            )));
        }
        if burn_in >= self.t_final {
            return Err(Error::EmptyWindow {
                burn_in,
                t_final: self.t_final,
            });
        }
        let mut occupation = vec![0.0; self.n_max + 1];
        for (k, &(t, state)) in self.events.iter().enumerate() {
            let t_next = self
                .events
                .get(k + 1)
                .map(|&(t, _)| t)
                .unwrap_or(self.t_final);
            let lo = t.max(burn_in);
            let hi = t_next.min(self.t_final);
            if hi > lo {
                occupation[state as usize] += hi - lo;
            }
        }
        Ok(Distribution::from_weights(occupation, Provenance::Empirical))
    }
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    // 53 random mantissa bits, uniform on [0, 1)
    (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// Runs the direct-method sampler on `schedule` from state `n0` up to time
/// `t_max`. Identical inputs produce bit-identical trajectories.
pub fn gillespie_run(
    schedule: &RateSchedule,
    n0: usize,
    t_max: f64,
    seed: u64,
) -> Result<Trajectory> {
    let n_max = schedule.last_state();
    if n0 > n_max {
        return Err(Error::IndexOutOfRange {
            index: n0,
            min: 0,
            max: n_max,
        });
    }
    if t_max <= 0.0 || !t_max.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "t_max must be positive and finite, got {t_max}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut events = vec![(0.0, n0 as u32)];
    let mut state = n0;
    let mut t = 0.0;
    let mut frozen = false;

    loop {
        let up = if state < n_max {
            schedule.birth(state as isize)
        } else {
            0.0
        };
        let down = if state > 0 {
            schedule.death(state as isize)
        } else {
            0.0
        };
        let total = up + down;
        if total == 0.0 {
            frozen = true;
            break;
        }
        // 1 - u lies in (0, 1], so the log is finite
        let wait = -(1.0 - uniform(&mut rng)).ln() / total;
        t += wait;
        if t > t_max {
            break;
        }
        state = if uniform(&mut rng) * total < up {
            state + 1
        } else {
            state - 1
        };
        events.push((t, state as u32));
    }

    Ok(Trajectory {
        events,
        seed,
        schedule_label: schedule.label().to_string(),
        rng_algorithm: RNG_ALGORITHM,
        n_max,
        t_final: t_max,
        frozen,
    })
}

/// Total variation distance `0.5 * sum |p_n - q_n|`, in `[0, 1]` for
/// probability vectors.
pub fn total_variation(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    Ok(p.probabilities()
        .iter()
        .zip(q.probabilities())
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stationary::classical_stationary;

    #[test]
    fn same_seed_same_trajectory() {
        let s = RateSchedule::constant(0.5, 20).unwrap();
        let a = gillespie_run(&s, 0, 500.0, 42).unwrap();
        let b = gillespie_run(&s, 0, 500.0, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ() {
        let s = RateSchedule::constant(0.5, 20).unwrap();
        let a = gillespie_run(&s, 0, 500.0, 42).unwrap();
        let b = gillespie_run(&s, 0, 500.0, 43).unwrap();
        assert_ne!(a.events(), b.events());
    }

    #[test]
    fn trajectory_invariants_hold() {
        let s = RateSchedule::asymmetric(0.1, 10).unwrap();
        let tr = gillespie_run(&s, 5, 2000.0, 7).unwrap();
        assert!(tr.n_jumps() > 100);
        for w in tr.events().windows(2) {
            assert!(w[1].0 > w[0].0, "times must strictly increase");
            let diff = (w[1].1 as i64 - w[0].1 as i64).abs();
            assert_eq!(diff, 1, "states must move by single steps");
        }
        assert!(tr.events().iter().all(|&(_, n)| n <= 10));
        assert_eq!(tr.rng_algorithm(), RNG_ALGORITHM);
        assert!(!tr.is_frozen());
    }

    #[test]
    fn two_state_occupation_matches_exact_fraction() {
        // For N = 1 the stationary weight of state 1 is b_0 / (b_0 + d_1).
        let s = RateSchedule::from_arrays(vec![0.3, 0.3, 0.3], vec![0.0, 0.7, 0.7, 0.7], 1, "two")
            .unwrap();
        let tr = gillespie_run(&s, 0, 3.0e5, 2024).unwrap();
        assert!(tr.n_jumps() >= 100_000);
        let emp = tr.empirical_stationary(3.0e4).unwrap();
        let exact = 0.3 / (0.3 + 0.7);
        assert!(
            (emp.p(1) - exact).abs() < 0.01,
            "occupation {} vs exact {exact}",
            emp.p(1)
        );
    }

    #[test]
    fn small_uniform_chain_converges() {
        let s = RateSchedule::constant(0.5, 5).unwrap();
        let tr = gillespie_run(&s, 0, 5.0e4, 11).unwrap();
        let emp = tr.empirical_stationary(5.0e3).unwrap();
        let tv = total_variation(&emp, &classical_stationary(&s)).unwrap();
        assert!(tv <= 0.02, "tv = {tv}");
    }

    #[test]
    fn long_run_on_the_wide_uniform_chain_converges() {
        let s = RateSchedule::constant(0.5, 20).unwrap();
        let tr = gillespie_run(&s, 0, 1.2e6, 5).unwrap();
        let emp = tr.empirical_stationary(1.2e5).unwrap();
        let tv = total_variation(&emp, &classical_stationary(&s)).unwrap();
        assert!(tv <= 0.02, "tv = {tv}");
    }

    #[test]
    fn empirical_weights_sum_to_one() {
        let s = RateSchedule::constant(0.5, 8).unwrap();
        let tr = gillespie_run(&s, 4, 1000.0, 3).unwrap();
        let emp = tr.empirical_stationary(100.0).unwrap();
        assert!((emp.total() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn no_jump_window_is_a_point_mass() {
        // a horizon shorter than the first waiting time leaves the chain at
        // the initial state for the whole observation window
        let s = RateSchedule::constant(0.5, 8).unwrap();
        let tr = gillespie_run(&s, 4, 1e-9, 3).unwrap();
        assert_eq!(tr.n_jumps(), 0);
        let emp = tr.empirical_stationary(0.0).unwrap();
        assert_eq!(emp.p(4), 1.0);
    }

    #[test]
    fn empty_window_is_rejected() {
        let s = RateSchedule::constant(0.5, 8).unwrap();
        let tr = gillespie_run(&s, 4, 100.0, 3).unwrap();
        assert!(matches!(
            tr.empirical_stationary(100.0),
            Err(Error::EmptyWindow { .. })
        ));
        assert!(tr.empirical_stationary(-1.0).is_err());
    }

    #[test]
    fn total_variation_basics() {
        let p = Distribution::point_mass(0, 20);
        let q = Distribution::point_mass(20, 20);
        assert_eq!(total_variation(&p, &p).unwrap(), 0.0);
        assert_eq!(total_variation(&p, &q).unwrap(), 1.0);
        let u = classical_stationary(&RateSchedule::constant(0.5, 20).unwrap());
        let tv = total_variation(&u, &p).unwrap();
        assert!((tv - 20.0 / 21.0).abs() < 1e-12);
        let short = Distribution::point_mass(0, 5);
        assert!(total_variation(&p, &short).is_err());
    }
}
