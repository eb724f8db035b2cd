use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bdchain::commands::{cmd_simulate, cmd_solve, cmd_verify};
use bdchain::config::{figure_preset, FigureId, OutputFormat};
use bdchain::{DParam, Error, RunConfig};

/// Birth-death chain toolkit: stationary solution families, verification
/// suites, and stochastic cross-checks.
#[derive(Parser)]
#[command(name = "bdchain", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Output directory (default: config `out_dir`, else `out`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's D values; repeatable. Negative reals or `inf`.
    #[arg(long = "d", value_name = "D", allow_hyphen_values = true)]
    d: Vec<String>,
    /// Output format
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the stationary family for each D and emit CSVs
    Solve {
        /// Run configuration (JSON)
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the tolerance-gated invariant suite; exit 1 on any failure
    Verify {
        /// Run configuration (JSON)
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Stochastically simulate the effective chain and compare
    Simulate {
        /// Run configuration (JSON)
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        /// RNG seed (overrides config `seed`)
        #[arg(long)]
        seed: Option<u64>,
        /// Simulation horizon (overrides config `t_max`)
        #[arg(long)]
        t_max: Option<f64>,
        /// Occupation burn-in (overrides config `burn_in`)
        #[arg(long)]
        burn_in: Option<f64>,
        /// Also dump the full trajectory as time,state CSV
        #[arg(long)]
        trajectory: bool,
    },
    /// Preset: constant rates 0.5, N = 20, D in {-1000, -2000, inf}
    Figure1(CommonArgs),
    /// Preset: asymmetric eps = 0.02, N = 100, D in {-4, -40, inf}
    Figure2(CommonArgs),
    /// Preset: b_i = 0.1+exp(-0.12 i), d_i = 0.1+exp(-0.15 i)
    Figure3(CommonArgs),
    /// Preset: b_i = exp(-0.12 sqrt(i)), d_i = exp(-0.15 sqrt(i))
    Figure4(CommonArgs),
    /// Preset: b_i = 0.01+exp(-0.15 i), d_i = 0.01+exp(-0.12 i)
    Figure5(CommonArgs),
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<ExitCode, Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve { config, common } => {
            let cfg = load_config(&config, &common)?;
            let out = out_dir(&cfg, &common);
            let outcome = cmd_solve(&cfg, &out, "solution", &[])?;
            print_solve(&outcome, &out);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { config, common } => {
            let cfg = load_config(&config, &common)?;
            let out = common.out.clone().or_else(|| cfg.out_dir.clone());
            let outcome = cmd_verify(&cfg, out.as_deref())?;
            for c in &outcome.checks {
                println!(
                    "{} D={} : {} (value {:.3e}, gate {:.1e}){}",
                    if c.passed { "pass" } else { "FAIL" },
                    c.d,
                    c.name,
                    c.value,
                    c.threshold,
                    c.note.as_deref().map(|n| format!(" [{n}]")).unwrap_or_default(),
                );
            }
            println!(
                "positivity condition (advisory): {}",
                if outcome.positivity_condition_holds { "holds" } else { "violated" }
            );
            if outcome.all_passed {
                println!("verify: all checks passed");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("verify: FAILURES present");
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Simulate {
            config,
            common,
            seed,
            t_max,
            burn_in,
            trajectory,
        } => {
            let mut cfg = load_config(&config, &common)?;
            if t_max.is_some() {
                cfg.t_max = t_max;
            }
            if burn_in.is_some() {
                cfg.burn_in = burn_in;
            }
            cfg.validate()?;
            let seed = seed.or(cfg.seed).ok_or_else(|| {
                Error::Config("simulate needs a seed (--seed or config `seed`)".to_string())
            })?;
            let out = out_dir(&cfg, &common);
            let outcome = cmd_simulate(&cfg, &out, seed, trajectory)?;
            for e in &outcome.entries {
                match (&e.tv_distance, &e.error) {
                    (Some(tv), _) => println!(
                        "D={} : {} jumps, TV vs analytic = {:.4}{}",
                        e.d,
                        e.n_jumps.unwrap_or(0),
                        tv,
                        if e.frozen { " [frozen early]" } else { "" }
                    ),
                    (None, Some(err)) => println!("D={} : error: {err}", e.d),
                    _ => {}
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Figure1(common) => preset(FigureId::One, common),
        Command::Figure2(common) => preset(FigureId::Two, common),
        Command::Figure3(common) => preset(FigureId::Three, common),
        Command::Figure4(common) => preset(FigureId::Four, common),
        Command::Figure5(common) => preset(FigureId::Five, common),
    }
}

fn preset(id: FigureId, common: CommonArgs) -> Result<ExitCode, Error> {
    let mut cfg = figure_preset(id);
    apply_overrides(&mut cfg, &common)?;
    let out = out_dir(&cfg, &common);
    let outcome = cmd_solve(&cfg, &out, id.name(), &[id.default_notes()])?;
    print_solve(&outcome, &out);
    Ok(ExitCode::SUCCESS)
}

fn load_config(path: &std::path::Path, common: &CommonArgs) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::from_path(path)?;
    apply_overrides(&mut cfg, common)?;
    Ok(cfg)
}

fn apply_overrides(cfg: &mut RunConfig, common: &CommonArgs) -> Result<(), Error> {
    common.format.parse::<OutputFormat>()?;
    if !common.d.is_empty() {
        cfg.d_values = common
            .d
            .iter()
            .map(|t| DParam::parse(t))
            .collect::<Result<Vec<_>, _>>()?;
    }
    cfg.validate()
}

fn out_dir(cfg: &RunConfig, common: &CommonArgs) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn print_solve(outcome: &bdchain::commands::SolveOutcome, out: &std::path::Path) {
    println!(
        "schedule: {} (N = {}), rates: {}, output: {}",
        outcome.schedule_label,
        outcome.n_max,
        outcome.rates,
        out.display()
    );
    println!(
        "positivity condition (advisory): {}",
        if outcome.positivity_condition_holds { "holds" } else { "violated" }
    );
    for e in &outcome.entries {
        match &e.error {
            None => println!(
                "D={} : wrote {}, P0 = {:.6e}, min p = {:.3e}, riccati residual {:.2e}, stationarity residual {:.2e}",
                e.d,
                e.csv_file.as_ref().unwrap().display(),
                e.norm_constant.unwrap(),
                e.min_probability.unwrap(),
                e.max_riccati_residual.unwrap(),
                e.max_stationarity_residual.unwrap(),
            ),
            Some(err) => println!("D={} : no solution ({err})", e.d),
        }
    }
}
