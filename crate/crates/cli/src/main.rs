//! `swbench`: scenario runner for the shallow-water workbench.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 blow-up,
//! 3 verification failure.

mod artifacts;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use commands::{DampingArgs, Outcome, Suite};
use config::{Horizon, Overrides, Scenario};
use swbench::PeriodicGrid;

#[derive(Parser)]
#[command(name = "swbench", version, about = "Shallow-water estimate workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a fixed verification suite.
    Verify(VerifyArgs),
    /// Run a solver scenario and write its run directory.
    Run {
        #[command(subcommand)]
        what: RunWhat,
    },
    /// Parameter sweeps.
    Sweep {
        #[command(subcommand)]
        what: SweepWhat,
    },
    /// Print the summary of a run directory.
    Report {
        run: PathBuf,
        /// Rebuild the ledger from the stored checkpoint and compare.
        #[arg(long)]
        recompute: bool,
    },
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    #[arg(long, default_value_t = 64)]
    grid: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random fields or pairs to sample.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum RunWhat {
    /// The truncated shallow-water system.
    Sw(ScenarioArgs),
}

#[derive(Subcommand)]
enum SweepWhat {
    /// Gaps between truncations n and 2n of the same datum.
    Uniqueness {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Linear density decay rate against |ξ|.
    Damping {
        /// P'(1) of the linearized system.
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        nu: f64,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 0.5)]
        low_below: f64,
        #[arg(long, default_value_t = 8.0)]
        high_from: f64,
        #[arg(long, default_value = "damping")]
        name: String,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
    /// Temporal self-convergence at dt0, dt0/2, dt0/4 against dt0/16.
    Convergence {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        dt0: Option<f64>,
    },
}

#[derive(Args, Clone)]
struct ScenarioArgs {
    /// Built-in scenario.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Scenario file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run name; the run directory is <out>/<name>.
    #[arg(long)]
    name: Option<String>,
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    /// Grid points per direction.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Final time, or "auto".
    #[arg(long = "T")]
    t_final: Option<Horizon>,
    /// Friedrichs truncation; a comma-separated list for the uniqueness sweep.
    #[arg(long, value_delimiter = ',')]
    n: Vec<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Store every sample under checkpoints/.
    #[arg(long)]
    checkpoints: bool,
}

impl ScenarioArgs {
    fn resolve(&self, default_preset: &str, suffix: &str) -> Result<Scenario> {
        let base = match (&self.preset, &self.config) {
            (_, Some(path)) => config::load(path)?,
            (Some(p), None) => config::preset(p)?,
            (None, None) => config::preset(default_preset)?,
        };
        let name = self
            .name
            .clone()
            .or_else(|| (!suffix.is_empty()).then(|| format!("{}-{suffix}", base.name)));
        let n_trunc = match self.n.as_slice() {
            [] => None,
            [n] => Some(*n),
            _ if suffix == "uniqueness" => None,
            _ => bail!("--n takes a single truncation here"),
        };
        let s = base.apply(&Overrides {
            name,
            grid: self.grid,
            dim: self.dim,
            gamma: self.gamma,
            t_final: self.t_final,
            n_trunc,
            eta: self.eta,
            seed: self.seed,
            checkpoints: self.checkpoints,
        });
        s.validate()?;
        Ok(s)
    }
}

fn dispatch(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Verify(a) => {
            if a.samples == 0 {
                bail!("--samples must be at least 1");
            }
            let grid = PeriodicGrid::new(a.dim, a.grid)?;
            commands::verify(a.suite, grid, a.samples, a.seed, a.json)
        }
        Command::Run { what: RunWhat::Sw(a) } => {
            let s = a.resolve("small-data", "")?;
            commands::run_sw(&s, &a.out)
        }
        Command::Sweep { what } => match what {
            SweepWhat::Uniqueness { scenario } => {
                let s = scenario.resolve("band-limited", "uniqueness")?;
                let ns = if scenario.n.is_empty() {
                    vec![16.0, 32.0, 64.0]
                } else {
                    scenario.n.clone()
                };
                commands::sweep_uniqueness(&s, &ns, &scenario.out)
            }
            SweepWhat::Damping {
                gamma,
                nu,
                horizon,
                low_below,
                high_from,
                name,
                out,
            } => {
                if !(gamma > 0.0 && nu > 0.0 && horizon > 0.0 && low_below > 0.0 && high_from > low_below) {
                    bail!("damping sweep needs positive P'(1), ν, horizon and 0 < low-below < high-from");
                }
                let a = DampingArgs {
                    pressure: gamma,
                    nu,
                    horizon,
                    low_below,
                    high_from,
                };
                commands::sweep_damping(&name, &a, &out)
            }
            SweepWhat::Convergence { scenario, dt0 } => {
                let s = scenario.resolve("trig", "convergence")?;
                let dt0 = match dt0.or(s.run.dt) {
                    Some(d) if d > 0.0 => d,
                    Some(d) => bail!("dt0 must be positive, got {d}"),
                    None => bail!("the convergence sweep needs --dt0 or a [run] dt"),
                };
                commands::sweep_convergence(&s, dt0, &scenario.out)
            }
        },
        Command::Report { run, recompute } => commands::report(&run, recompute),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(o) => ExitCode::from(o.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
