//! Implementations of the `solve`, `verify`, and `simulate` commands.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::dynamics::Generator;
use crate::error::Result;
use crate::output::{
    distribution_filename, ensure_dir, write_distribution_csv, write_trajectory_csv, CsvMeta,
};
use crate::riccati::{DParam, RiccatiSequence};
use crate::schedule::{RateSchedule, ScheduleConfig};
use crate::sim::{gillespie_run, total_variation};
use crate::stationary::{
    asymmetric_closed_form, classical_stationary, constant_closed_form, effective_schedule,
    parametric_stationary, Distribution,
};
use crate::tolerances;

/// Jump-count target used to derive a simulation horizon when the
/// configuration does not pin one.
const TARGET_EVENTS: f64 = 2.0e6;

fn sort_key(d: &DParam) -> f64 {
    match d {
        DParam::NegInf => f64::NEG_INFINITY,
        DParam::Finite(v) => *v,
    }
}

fn sorted_d_values(config: &RunConfig) -> Vec<DParam> {
    let mut ds = config.d_values.clone();
    ds.sort_by(|a, b| sort_key(a).total_cmp(&sort_key(b)));
    ds
}

/// Per-D record produced by [`cmd_solve`]. File names are relative to the
/// output directory, so summaries are independent of where the run landed.
#[derive(Debug, Clone, Serialize)]
pub struct SolveEntry {
    pub d: DParam,
    pub csv_file: Option<PathBuf>,
    pub norm_constant: Option<f64>,
    pub min_probability: Option<f64>,
    pub max_riccati_residual: Option<f64>,
    pub max_stationarity_residual: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveOutcome {
    pub schedule_label: String,
    pub rates: String,
    pub n_max: usize,
    /// Advisory ratio-condition verdict for the schedule.
    pub positivity_condition_holds: bool,
    pub entries: Vec<SolveEntry>,
}

impl SolveOutcome {
    /// True when every requested D produced a distribution.
    pub fn all_solved(&self) -> bool {
        self.entries.iter().all(|e| e.error.is_none())
    }
}

/// Computes the family member for each D, writes one CSV per D plus a JSON
/// summary, and reports residual diagnostics. A D value without a positive
/// solution is recorded as an error entry without aborting the others.
pub fn cmd_solve(
    config: &RunConfig,
    out_dir: &Path,
    prefix: &str,
    extra_notes: &[&str],
) -> Result<SolveOutcome> {
    let schedule = RateSchedule::from_config(&config.schedule)?;
    let out_dir = ensure_dir(out_dir)?;
    let rates = config.schedule.describe_rates();
    let report = schedule.positivity_report();

    let mut entries = Vec::new();
    for d in sorted_d_values(config) {
        match solve_one(&schedule, d) {
            Ok((p, riccati_residual, stationarity_residual)) => {
                let name = PathBuf::from(distribution_filename(prefix, &d));
                let mut meta = CsvMeta::new(schedule.label(), &rates, schedule.last_state(), &d);
                for note in extra_notes {
                    meta = meta.with_note(note);
                }
                write_distribution_csv(&out_dir.join(&name), &p, &meta)?;
                entries.push(SolveEntry {
                    d,
                    csv_file: Some(name),
                    norm_constant: Some(p.norm_constant()),
                    min_probability: Some(p.min_probability()),
                    max_riccati_residual: Some(riccati_residual),
                    max_stationarity_residual: Some(stationarity_residual),
                    error: None,
                });
            }
            Err(e) => entries.push(SolveEntry {
                d,
                csv_file: None,
                norm_constant: None,
                min_probability: None,
                max_riccati_residual: None,
                max_stationarity_residual: None,
                error: Some(e.to_string()),
            }),
        }
    }

    let outcome = SolveOutcome {
        schedule_label: schedule.label().to_string(),
        rates,
        n_max: schedule.last_state(),
        positivity_condition_holds: report.all_hold,
        entries,
    };
    let summary_path = out_dir.join(format!("{prefix}_summary.json"));
    std::fs::write(&summary_path, serde_json::to_string_pretty(&outcome)?)?;
    Ok(outcome)
}

/// Solves one D value and returns the distribution together with the
/// max Riccati residual of the matching general solution and the max
/// stationarity residual against the effective generator.
fn solve_one(schedule: &RateSchedule, d: DParam) -> Result<(Distribution, f64, f64)> {
    let p = parametric_stationary(schedule, d)?;
    let y = RiccatiSequence::general(schedule, d)?;
    let riccati_residual = y.max_residual(schedule);
    let eff = effective_schedule(schedule, d)?;
    let stationarity_residual = Generator::from_schedule(&eff).stationarity_residual(&p)?;
    Ok((p, riccati_residual, stationarity_residual))
}

/// One named tolerance check of the verification report.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub d: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckResult {
    fn gate(name: &str, d: &DParam, value: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            d: d.to_string(),
            value,
            threshold,
            passed: value <= threshold,
            note: None,
        }
    }

    fn failure(name: &str, d: &DParam, note: String) -> Self {
        Self {
            name: name.to_string(),
            d: d.to_string(),
            value: f64::NAN,
            threshold: 0.0,
            passed: false,
            note: Some(note),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyOutcome {
    pub schedule_label: String,
    pub positivity_condition_holds: bool,
    /// The ratio condition is advisory and never fails the run by itself.
    pub positivity_condition_advisory: bool,
    pub checks: Vec<CheckResult>,
    pub all_passed: bool,
}

/// Runs the invariant suite for every (schedule, D) pair of the
/// configuration. The outcome's `all_passed` drives the process exit
/// status.
pub fn cmd_verify(config: &RunConfig, out_dir: Option<&Path>) -> Result<VerifyOutcome> {
    let schedule = RateSchedule::from_config(&config.schedule)?;
    let report = schedule.positivity_report();
    let mut checks = Vec::new();

    for d in sorted_d_values(config) {
        match parametric_stationary(&schedule, d) {
            Err(e) => {
                checks.push(CheckResult::failure("parametric_solution", &d, e.to_string()));
                continue;
            }
            Ok(p) => {
                checks.push(CheckResult::gate(
                    "normalization",
                    &d,
                    (p.total() - 1.0).abs(),
                    tolerances::NORMALIZATION_ABS,
                ));
                let min_p = p.min_probability();
                checks.push(CheckResult {
                    name: "positivity".to_string(),
                    d: d.to_string(),
                    value: min_p,
                    threshold: 0.0,
                    passed: min_p > 0.0,
                    note: None,
                });

                // Riccati recurrence residual of the solution at this D
                let y = RiccatiSequence::general(&schedule, d)?;
                let (residual_gate, residual_name) = if d.is_neg_inf() {
                    (tolerances::PARTICULAR_RESIDUAL_MAX, "riccati_residual_particular")
                } else {
                    (tolerances::RICCATI_RESIDUAL_MAX, "riccati_residual")
                };
                checks.push(CheckResult::gate(
                    residual_name,
                    &d,
                    y.max_residual(&schedule),
                    residual_gate,
                ));

                // closed-form equivalence where a closed form exists
                if let Some(closed) = closed_form_for(&config.schedule, d)? {
                    let diff = max_abs_diff(&p, &closed);
                    checks.push(CheckResult::gate(
                        "closed_form_equivalence",
                        &d,
                        diff,
                        tolerances::CLOSED_FORM_ABS,
                    ));
                }

                // independent null-space oracle of the matching generator
                let eff = effective_schedule(&schedule, d)?;
                let oracle = Generator::from_schedule(&eff).null_space_stationary()?;
                checks.push(CheckResult::gate(
                    "null_space_oracle_tv",
                    &d,
                    total_variation(&oracle, &p)?,
                    tolerances::ORACLE_TV,
                ));

                // stationarity under the matching generator
                checks.push(CheckResult::gate(
                    "stationarity_residual",
                    &d,
                    Generator::from_schedule(&eff).stationarity_residual(&p)?,
                    tolerances::STATIONARITY_RESIDUAL_MAX,
                ));

                // substitution round trip
                let back = RiccatiSequence::from_distribution(&p, &schedule)?
                    .to_distribution(&schedule)?;
                checks.push(CheckResult::gate(
                    "round_trip",
                    &d,
                    max_abs_diff(&p, &back),
                    tolerances::ROUND_TRIP_ABS,
                ));

                if d.is_neg_inf() {
                    let classical = classical_stationary(&schedule);
                    let exact = if p.probabilities() == classical.probabilities() {
                        0.0
                    } else {
                        max_abs_diff(&p, &classical)
                    };
                    checks.push(CheckResult::gate("limit_equals_classical", &d, exact, 0.0));
                }
            }
        }
    }

    let all_passed = checks.iter().all(|c| c.passed);
    let outcome = VerifyOutcome {
        schedule_label: schedule.label().to_string(),
        positivity_condition_holds: report.all_hold,
        positivity_condition_advisory: true,
        checks,
        all_passed,
    };
    if let Some(dir) = out_dir {
        let dir = ensure_dir(dir)?;
        std::fs::write(
            dir.join("verify_report.json"),
            serde_json::to_string_pretty(&outcome)?,
        )?;
    }
    Ok(outcome)
}

fn closed_form_for(cfg: &ScheduleConfig, d: DParam) -> Result<Option<Distribution>> {
    Ok(match cfg {
        ScheduleConfig::Constant { b, n } => Some(constant_closed_form(*b, *n, d)?),
        ScheduleConfig::Asymmetric { epsilon, n } => Some(asymmetric_closed_form(*epsilon, *n, d)?),
        _ => None,
    })
}

fn max_abs_diff(p: &Distribution, q: &Distribution) -> f64 {
    p.probabilities()
        .iter()
        .zip(q.probabilities())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Per-D record produced by [`cmd_simulate`].
#[derive(Debug, Clone, Serialize)]
pub struct SimulateEntry {
    pub d: DParam,
    pub csv_file: Option<PathBuf>,
    pub seed: u64,
    pub t_max: f64,
    pub burn_in: f64,
    pub n_jumps: Option<usize>,
    pub frozen: bool,
    pub tv_distance: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateOutcome {
    pub schedule_label: String,
    pub rng_algorithm: &'static str,
    pub entries: Vec<SimulateEntry>,
}

/// Simulates the effective chain for each finite D (the original chain for
/// the limit entry) and reports the total-variation distance between the
/// time-weighted occupation measure and the analytic prediction.
pub fn cmd_simulate(
    config: &RunConfig,
    out_dir: &Path,
    seed: u64,
    dump_trajectory: bool,
) -> Result<SimulateOutcome> {
    let schedule = RateSchedule::from_config(&config.schedule)?;
    let out_dir = ensure_dir(out_dir)?;
    let rates = config.schedule.describe_rates();

    let mut entries = Vec::new();
    for (idx, d) in sorted_d_values(config).into_iter().enumerate() {
        let run_seed = seed.wrapping_add(idx as u64);
        match simulate_one(config, &schedule, d, run_seed) {
            Ok((chain, analytic, trajectory, empirical, t_max, burn_in)) => {
                let name = PathBuf::from(distribution_filename("empirical", &d));
                let meta = CsvMeta::new(chain.label(), &rates, chain.last_state(), &d)
                    .with_note(&format!("seed: {run_seed}, rng: {}", trajectory.rng_algorithm()))
                    .with_note(&format!(
                        "jumps: {}, t_max: {t_max}, burn_in: {burn_in}",
                        trajectory.n_jumps()
                    ));
                write_distribution_csv(&out_dir.join(&name), &empirical, &meta)?;
                if dump_trajectory {
                    let tr_file = out_dir.join(format!("trajectory_D_{d}.csv"));
                    write_trajectory_csv(&tr_file, &trajectory)?;
                }
                entries.push(SimulateEntry {
                    d,
                    csv_file: Some(name),
                    seed: run_seed,
                    t_max,
                    burn_in,
                    n_jumps: Some(trajectory.n_jumps()),
                    frozen: trajectory.is_frozen(),
                    tv_distance: Some(total_variation(&empirical, &analytic)?),
                    error: None,
                });
            }
            Err(e) => entries.push(SimulateEntry {
                d,
                csv_file: None,
                seed: run_seed,
                t_max: config.t_max.unwrap_or(f64::NAN),
                burn_in: config.burn_in.unwrap_or(f64::NAN),
                n_jumps: None,
                frozen: false,
                tv_distance: None,
                error: Some(e.to_string()),
            }),
        }
    }

    let outcome = SimulateOutcome {
        schedule_label: schedule.label().to_string(),
        rng_algorithm: crate::sim::RNG_ALGORITHM,
        entries,
    };
    std::fs::write(
        out_dir.join("simulate_report.json"),
        serde_json::to_string_pretty(&outcome)?,
    )?;
    Ok(outcome)
}

type SimulationPieces = (
    RateSchedule,
    Distribution,
    crate::Trajectory,
    Distribution,
    f64,
    f64,
);

fn simulate_one(
    config: &RunConfig,
    schedule: &RateSchedule,
    d: DParam,
    seed: u64,
) -> Result<SimulationPieces> {
    let (chain, analytic) = if d.is_neg_inf() {
        (schedule.clone(), classical_stationary(schedule))
    } else {
        (
            effective_schedule(schedule, d)?,
            parametric_stationary(schedule, d)?,
        )
    };
    let t_max = match config.t_max {
        Some(t) => t,
        None => TARGET_EVENTS / mean_jump_rate(&chain, &analytic),
    };
    let burn_in = config.burn_in.unwrap_or(0.1 * t_max);
    let trajectory = gillespie_run(&chain, 0, t_max, seed)?;
    let empirical = trajectory.empirical_stationary(burn_in)?;
    Ok((chain, analytic, trajectory, empirical, t_max, burn_in))
}

/// Expected total jump rate under the analytic stationary distribution,
/// used to convert a jump-count target into a horizon.
fn mean_jump_rate(chain: &RateSchedule, stationary: &Distribution) -> f64 {
    let n_max = chain.last_state();
    (0..=n_max)
        .map(|n| {
            let up = if n < n_max { chain.birth(n as isize) } else { 0.0 };
            let down = if n > 0 { chain.death(n as isize) } else { 0.0 };
            stationary.p(n) * (up + down)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{figure_preset, FigureId};

    #[test]
    fn solve_figure1_emits_csvs_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let config = figure_preset(FigureId::One);
        let outcome = cmd_solve(&config, dir.path(), "figure1", &[]).unwrap();
        assert!(outcome.all_solved());
        assert_eq!(outcome.entries.len(), 3);
        // sorted by D: the limit entry comes first
        assert!(outcome.entries[0].d.is_neg_inf());
        for entry in &outcome.entries {
            let file = dir.path().join(entry.csv_file.as_ref().unwrap());
            assert!(file.exists());
            assert!(entry.max_riccati_residual.unwrap() <= 1e-10);
            assert!(entry.max_stationarity_residual.unwrap() <= 1e-12);
        }
        assert!(dir.path().join("figure1_summary.json").exists());
        // the limit CSV is uniform
        let rows =
            crate::output::read_distribution_csv(&dir.path().join("figure1_D_inf.csv")).unwrap();
        for (_, p) in rows {
            assert!((p - 1.0 / 21.0).abs() < 1e-15);
        }
    }

    #[test]
    fn solve_records_unsolvable_d_without_aborting() {
        let config = RunConfig::from_json_str(
            r#"{
                "schedule": {"kind": "explicit",
                             "b": [1.0, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1],
                             "d": [0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
                             "N": 5},
                "d_values": [-4, -1000000]
            }"#,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let outcome = cmd_solve(&config, dir.path(), "solution", &[]).unwrap();
        assert!(!outcome.all_solved());
        let failed: Vec<_> = outcome.entries.iter().filter(|e| e.error.is_some()).collect();
        assert_eq!(failed.len(), 1);
        assert_eq!(failed[0].d, DParam::Finite(-4.0));
        assert!(failed[0].error.as_ref().unwrap().contains("denominator"));
    }

    #[test]
    fn verify_passes_on_presets() {
        for id in [FigureId::One, FigureId::Two, FigureId::Five] {
            let config = figure_preset(id);
            let outcome = cmd_verify(&config, None).unwrap();
            assert!(
                outcome.all_passed,
                "verification failed for {}: {:?}",
                id.name(),
                outcome
                    .checks
                    .iter()
                    .filter(|c| !c.passed)
                    .collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn verify_flags_unsolvable_pairs() {
        let config = RunConfig::from_json_str(
            r#"{
                "schedule": {"kind": "explicit",
                             "b": [1.0, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1],
                             "d": [0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
                             "N": 5},
                "d_values": [-4]
            }"#,
        )
        .unwrap();
        let outcome = cmd_verify(&config, None).unwrap();
        assert!(!outcome.all_passed);
        assert_eq!(outcome.checks.len(), 1);
        assert_eq!(outcome.checks[0].name, "parametric_solution");
    }

    #[test]
    fn simulate_is_deterministic_and_reports_tv() {
        let config = RunConfig::from_json_str(
            r#"{
                "schedule": {"kind": "constant", "b": 0.5, "N": 10},
                "d_values": [-1000, "inf"],
                "t_max": 20000.0
            }"#,
        )
        .unwrap();
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let a = cmd_simulate(&config, dir_a.path(), 9, false).unwrap();
        let b = cmd_simulate(&config, dir_b.path(), 9, false).unwrap();
        for (ea, eb) in a.entries.iter().zip(&b.entries) {
            assert_eq!(ea.tv_distance, eb.tv_distance);
            assert_eq!(ea.n_jumps, eb.n_jumps);
            let fa = std::fs::read(dir_a.path().join(ea.csv_file.as_ref().unwrap())).unwrap();
            let fb = std::fs::read(dir_b.path().join(eb.csv_file.as_ref().unwrap())).unwrap();
            assert_eq!(fa, fb, "same seed must give identical CSV bytes");
            assert!(ea.tv_distance.unwrap() < 0.2);
        }
        assert!(dir_a.path().join("simulate_report.json").exists());
    }
}
