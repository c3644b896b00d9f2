//! Run directories: `<out>/<name>/{config.toml, ledger.csv, summary.json, checkpoints/}`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use swbench::diagnostics::{AprioriReport, EstimateLedger, HypothesisNorms, LedgerRow};
use swbench::friedrichs::{SolverState, Termination};

use crate::config::Scenario;

/// Bumped whenever the summary fields or the ledger columns change.
pub const SCHEMA_VERSION: u32 = 1;
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const CHECKPOINT_FILE: &str = "states.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub code_version: String,
    pub scenario: Scenario,
    pub seed: u64,
    pub outside_theorem_hypotheses: bool,
    pub initial_norms: HypothesisNorms,
    pub n_trunc: f64,
    pub t_final: f64,
    /// Set when the horizon came from the smallness conditions.
    pub auto_iterations: Option<usize>,
    pub termination: Termination,
    pub measured_c: f64,
    pub apriori: AprioriReport,
    pub final_row: LedgerRow,
    pub regularity_pair: (f64, f64),
    pub ubar_l1_profile: Vec<f64>,
    pub ul_l1_profile: Vec<f64>,
    pub ledger_columns: Vec<String>,
}

pub struct RunDir {
    pub path: PathBuf,
}

impl RunDir {
    pub fn create(out: &Path, name: &str) -> Result<Self> {
        let path = out.join(name);
        fs::create_dir_all(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(RunDir { path })
    }

    pub fn open(path: &Path) -> Result<Self> {
        if !path.join("summary.json").is_file() {
            anyhow::bail!("{} is not a run directory (no summary.json)", path.display());
        }
        Ok(RunDir {
            path: path.to_path_buf(),
        })
    }

    pub fn write_config(&self, s: &Scenario) -> Result<()> {
        let text = format!("# swbench {CODE_VERSION}, schema {SCHEMA_VERSION}\n{}", s.to_toml()?);
        fs::write(self.path.join("config.toml"), text)?;
        Ok(())
    }

    pub fn write_ledger(&self, ledger: &EstimateLedger) -> Result<()> {
        let mut w = csv::Writer::from_path(self.path.join("ledger.csv"))?;
        for row in &ledger.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_ledger(&self) -> Result<Vec<LedgerRow>> {
        let mut r = csv::Reader::from_path(self.path.join("ledger.csv"))?;
        let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
        if header != EstimateLedger::column_names() {
            anyhow::bail!("ledger.csv has unexpected columns {header:?}");
        }
        Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
    }

    pub fn write_summary(&self, s: &Summary) -> Result<()> {
        let text = serde_json::to_string_pretty(s)?;
        fs::write(self.path.join("summary.json"), text + "\n")?;
        Ok(())
    }

    pub fn read_summary(&self) -> Result<Summary> {
        let text = fs::read_to_string(self.path.join("summary.json"))?;
        let s: Summary = serde_json::from_str(&text).context("parsing summary.json")?;
        if s.schema_version != SCHEMA_VERSION {
            anyhow::bail!(
                "summary schema {} is not supported (expected {SCHEMA_VERSION})",
                s.schema_version
            );
        }
        Ok(s)
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.path.join("checkpoints").join(CHECKPOINT_FILE)
    }

    pub fn write_checkpoint(&self, states: &[SolverState]) -> Result<()> {
        fs::create_dir_all(self.path.join("checkpoints"))?;
        swbench::checkpoint::write_checkpoint(&self.checkpoint_path(), states)?;
        Ok(())
    }

    pub fn write_table<T: Serialize>(&self, file: &str, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_path(self.path.join(file))?;
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<T: Serialize>(&self, file: &str, value: &T) -> Result<()> {
        fs::write(self.path.join(file), serde_json::to_string_pretty(value)? + "\n")?;
        Ok(())
    }
}
