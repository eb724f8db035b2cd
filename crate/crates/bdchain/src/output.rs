//! CSV emission and re-parsing.
//!
//! Distribution files carry a `#`-prefixed metadata block, a `n,P_n` header
//! row, and one row per state with the probability printed to 17 significant
//! digits so doubles round-trip losslessly through the text.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::riccati::DParam;
use crate::stationary::Distribution;
use crate::Trajectory;

/// Metadata block written at the top of each distribution CSV.
#[derive(Debug, Clone)]
pub struct CsvMeta {
    pub schedule_label: String,
    pub rates: String,
    pub n_max: usize,
    pub d: String,
    pub notes: Vec<String>,
}

impl CsvMeta {
    pub fn new(schedule_label: &str, rates: &str, n_max: usize, d: &DParam) -> Self {
        Self {
            schedule_label: schedule_label.to_string(),
            rates: rates.to_string(),
            n_max,
            d: d.to_string(),
            notes: Vec::new(),
        }
    }

    pub fn with_note(mut self, note: &str) -> Self {
        self.notes.push(note.to_string());
        self
    }
}

/// File name for a per-D distribution: `<prefix>_D_<token>.csv`.
pub fn distribution_filename(prefix: &str, d: &DParam) -> String {
    format!("{prefix}_D_{d}.csv")
}

pub fn write_distribution_csv(path: &Path, dist: &Distribution, meta: &CsvMeta) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# schedule: {}", meta.schedule_label)?;
    writeln!(w, "# rates: {}", meta.rates)?;
    writeln!(w, "# N: {}", meta.n_max)?;
    writeln!(w, "# D: {}", meta.d)?;
    writeln!(w, "# tool: bdchain {}", env!("CARGO_PKG_VERSION"))?;
    for note in &meta.notes {
        writeln!(w, "# note: {note}")?;
    }
    writeln!(w, "n,P_n")?;
    for (n, p) in dist.probabilities().iter().enumerate() {
        writeln!(w, "{n},{p:.16e}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads back a distribution CSV, skipping metadata lines. Returns the
/// `(n, P_n)` rows in file order.
pub fn read_distribution_csv(path: &Path) -> Result<Vec<(usize, f64)>> {
    let reader = BufReader::new(File::open(path)?);
    let mut rows = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('n') {
            continue;
        }
        let (n_text, p_text) = line
            .split_once(',')
            .ok_or_else(|| Error::Config(format!("malformed CSV row '{line}'")))?;
        let n = n_text
            .trim()
            .parse::<usize>()
            .map_err(|e| Error::Config(format!("bad state index '{n_text}': {e}")))?;
        let p = p_text
            .trim()
            .parse::<f64>()
            .map_err(|e| Error::Config(format!("bad probability '{p_text}': {e}")))?;
        rows.push((n, p));
    }
    Ok(rows)
}

/// Optional trajectory dump: `time,state` rows.
pub fn write_trajectory_csv(path: &Path, trajectory: &Trajectory) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# schedule: {}", trajectory.schedule_label())?;
    writeln!(w, "# seed: {}", trajectory.seed())?;
    writeln!(w, "# rng: {}", trajectory.rng_algorithm())?;
    writeln!(w, "time,state")?;
    for &(t, state) in trajectory.events() {
        writeln!(w, "{t:.16e},{state}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn ensure_dir(dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    Ok(dir.to_path_buf())
}
