use std::path::Path;

use anyhow::{bail, Result};
use serde::Serialize;
use swbench::diagnostics::apriori::{check_apriori, select_cutoff, AprioriReport, Check};
use swbench::diagnostics::ledger::{measure_density_constant, EstimateLedger, LedgerBuilder};
use swbench::diagnostics::scenario::{auto_horizon_run, AutoOptions};
use swbench::diagnostics::suites::{verify_lp, verify_paraproduct, verify_semigroup, SuiteReport};
use swbench::diagnostics::sweeps::{damping_sweep, temporal_convergence, uniqueness_sweep};
use swbench::friedrichs::{run_with, Physics, Retain, RunConfig, SolverState, Termination};
use swbench::initial_data::InitialDatum;
use swbench::littlewood_paley::{make_partition, DyadicPartition};
use swbench::PeriodicGrid;

use crate::artifacts::{RunDir, Summary, CODE_VERSION, SCHEMA_VERSION};
use crate::config::{Horizon, Scenario};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    BlowUp,
    VerificationFailed,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Ok => 0,
            Outcome::BlowUp => 2,
            Outcome::VerificationFailed => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Lp,
    Paraproduct,
    Semigroup,
}

fn print_check(c: &Check) {
    println!(
        "  {:<28} {:>12.4e} <= {:<12.4e} {}",
        c.name,
        c.lhs,
        c.rhs,
        if c.holds { "ok" } else { "FAIL" }
    );
}

pub fn verify(suite: Suite, grid: PeriodicGrid, samples: usize, seed: u64, json: bool) -> Result<Outcome> {
    let report: SuiteReport = match suite {
        Suite::Lp => verify_lp(grid, samples, seed),
        Suite::Paraproduct => verify_paraproduct(grid, samples, seed)?,
        Suite::Semigroup => verify_semigroup(grid, seed)?,
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("suite {} on N = {}, d = {}", report.name, grid.n(), grid.dim());
        for c in &report.checks {
            print_check(c);
        }
        for (k, v) in &report.measured {
            println!("  {k:<28} {v:>12.4e}");
        }
        println!("{}", if report.passed() { "passed" } else { "FAILED" });
    }
    Ok(if report.passed() {
        Outcome::Ok
    } else {
        Outcome::VerificationFailed
    })
}

fn prepare(s: &Scenario) -> Result<(DyadicPartition, InitialDatum)> {
    s.validate()?;
    let grid = s.grid()?;
    let part = make_partition(&grid);
    let datum = s.initial.generate(&part)?;
    if datum.outside_hypotheses {
        log::warn!("scenario {:?} lies outside the theorem's hypotheses", s.name);
    }
    Ok((part, datum))
}

struct Outcomes {
    ledger: EstimateLedger,
    termination: Termination,
    states: Vec<SolverState>,
    t_final: f64,
    c: f64,
    report: AprioriReport,
    auto_iterations: Option<usize>,
}

/// One run with the ledger folded on the fly, keeping every sample only
/// when it is needed for a checkpoint.
fn fixed_run(
    s: &Scenario,
    part: &DyadicPartition,
    datum: &InitialDatum,
    cfg: &RunConfig,
) -> Result<(EstimateLedger, Termination, Vec<SolverState>)> {
    let mut b = LedgerBuilder::new(part);
    let traj = run_with(&datum.q0, &datum.u0, cfg, |st| b.push(st))?;
    let states = if s.run.checkpoints { traj.states } else { Vec::new() };
    Ok((b.finish(), traj.termination, states))
}

fn cutoff(part: &DyadicPartition, datum: &InitialDatum, eta: f64) -> Result<i32> {
    match select_cutoff(part, &datum.q0, eta) {
        Ok(m) => Ok(m),
        Err(swbench::Error::Resolution(msg)) => {
            log::warn!("{msg}; using the top block");
            Ok(part.j_max())
        }
        Err(e) => Err(e.into()),
    }
}

fn execute(s: &Scenario, part: &DyadicPartition, datum: &InitialDatum) -> Result<Outcomes> {
    let law = s.law()?;
    let n = s.n_trunc();
    let eta = s.run.eta;
    match s.run.t_final {
        Horizon::Auto(_) => {
            if s.physics() != Physics::FULL {
                bail!("an automatic horizon needs the full physics");
            }
            let opts = AutoOptions {
                eta,
                steps: s.run.steps,
                ..AutoOptions::default()
            };
            let auto = auto_horizon_run(part, &datum.q0, &datum.u0, n, law, &opts)?;
            let mut states = Vec::new();
            if s.run.checkpoints && auto.t_auto > 0.0 {
                // Same configuration as the final ledger run, keeping every sample.
                let mut cfg = RunConfig::new(auto.t_auto, n);
                cfg.law = law;
                cfg.dt = Some(auto.t_auto / s.run.steps as f64);
                cfg.survey = true;
                let (_, _, st) = fixed_run(s, part, datum, &cfg)?;
                states = st;
            }
            Ok(Outcomes {
                ledger: auto.ledger,
                termination: auto.termination,
                states,
                t_final: auto.t_auto,
                c: auto.c,
                report: auto.report,
                auto_iterations: Some(auto.iterations),
            })
        }
        Horizon::Fixed(t) => {
            let mut cfg = RunConfig::new(t, n);
            cfg.law = law;
            cfg.physics = s.physics();
            cfg.dt = s.run.dt;
            cfg.sample_stride = s.run.sample_stride;
            cfg.survey = true;
            cfg.retain = if s.run.checkpoints {
                Retain::All
            } else {
                Retain::Endpoints
            };
            let (ledger, termination, states) = fixed_run(s, part, datum, &cfg)?;
            let c = measure_density_constant(&ledger);
            let report = check_apriori(&ledger, eta, cutoff(part, datum, eta)?, Some(c));
            Ok(Outcomes {
                ledger,
                termination,
                states,
                t_final: t,
                c,
                report,
                auto_iterations: None,
            })
        }
    }
}

fn print_report(r: &AprioriReport) {
    println!(
        "smallness conditions (η = {}, m = {}, C = {:.4e}, C' = {:.4e}):",
        r.eta, r.m, r.c, r.c_prime
    );
    for c in &r.hypotheses {
        print_check(c);
    }
    match &r.conclusions {
        Some(cs) => {
            println!("conclusions:");
            for c in cs {
                print_check(c);
            }
        }
        None => println!(
            "conclusions withheld; first violated inequality: {}",
            r.first_violation.as_deref().unwrap_or("?")
        ),
    }
}

pub fn run_sw(s: &Scenario, out: &Path) -> Result<Outcome> {
    let (part, datum) = prepare(s)?;
    let o = execute(s, &part, &datum)?;
    let dir = RunDir::create(out, &s.name)?;
    dir.write_config(s)?;
    dir.write_ledger(&o.ledger)?;
    if s.run.checkpoints && !o.states.is_empty() {
        dir.write_checkpoint(&o.states)?;
    }
    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        code_version: CODE_VERSION.into(),
        scenario: s.clone(),
        seed: s.seed,
        outside_theorem_hypotheses: datum.outside_hypotheses || o.ledger.outside_theorem_hypotheses,
        initial_norms: datum.norms.clone(),
        n_trunc: s.n_trunc(),
        t_final: o.t_final,
        auto_iterations: o.auto_iterations,
        termination: o.termination.clone(),
        measured_c: o.c,
        apriori: o.report.clone(),
        final_row: o.ledger.last().clone(),
        regularity_pair: o.ledger.regularity_pair(),
        ubar_l1_profile: o.ledger.ubar_l1_profile.clone(),
        ul_l1_profile: o.ledger.ul_l1_profile.clone(),
        ledger_columns: EstimateLedger::column_names().iter().map(|c| c.to_string()).collect(),
    };
    dir.write_summary(&summary)?;

    println!("run {} -> {}", s.name, dir.path.display());
    print_summary(&summary);
    Ok(outcome_of(&summary))
}

fn outcome_of(s: &Summary) -> Outcome {
    if s.termination != Termination::Completed {
        return Outcome::BlowUp;
    }
    let auto = s.auto_iterations.is_some();
    if auto && !(s.t_final > 0.0 && s.apriori.hypotheses_hold() && s.apriori.conclusions_hold()) {
        return Outcome::VerificationFailed;
    }
    Outcome::Ok
}

fn print_summary(s: &Summary) {
    let r = &s.final_row;
    match &s.termination {
        Termination::Completed => println!("completed at t = {:.6e}", r.time),
        Termination::BlowUp {
            time,
            min_density,
            reason,
        } => println!("BLOW-UP at t = {time:.6e}: {reason} (min density {min_density:.3e})"),
    }
    if let Some(k) = s.auto_iterations {
        println!("automatic horizon T = {:.6e} after {k} iteration(s)", s.t_final);
    }
    println!(
        "‖q‖ = {:.4e}  ‖ū‖ = {:.4e}  β = {:.4e}  V = {:.4e}  min ρ = {:.4e}",
        r.q_cl, r.ubar_cl, r.beta, r.v, r.min_density
    );
    if s.outside_theorem_hypotheses {
        println!("flag: outside the theorem's hypotheses");
    }
    print_report(&s.apriori);
}

pub fn report(path: &Path, recompute: bool) -> Result<Outcome> {
    let dir = RunDir::open(path)?;
    let summary = dir.read_summary()?;
    let rows = dir.read_ledger()?;
    println!(
        "run {} (swbench {}, schema {}), {} ledger rows",
        summary.scenario.name,
        summary.code_version,
        summary.schema_version,
        rows.len()
    );
    print_summary(&summary);
    let mut outcome = outcome_of(&summary);
    if recompute {
        let cp = dir.checkpoint_path();
        if !cp.is_file() {
            bail!("{} has no checkpoint to recompute from", path.display());
        }
        let states = swbench::checkpoint::read_checkpoint(&cp)?;
        let part = make_partition(states[0].grid());
        let mut b = LedgerBuilder::new(&part);
        for st in &states {
            b.push(st);
        }
        let again = b.finish();
        if again.rows == rows {
            println!("ledger recomputed from checkpoint: identical");
        } else {
            println!("ledger recomputed from checkpoint: DIFFERS");
            outcome = Outcome::VerificationFailed;
        }
    }
    Ok(outcome)
}

#[derive(Serialize)]
struct UniquenessLine {
    n: f64,
    n_ref: f64,
    beta_delta: f64,
    beta_delta_log: f64,
    dq_cl: f64,
    w: f64,
    osgood: f64,
    gronwall_factor: f64,
    v: f64,
}

pub fn sweep_uniqueness(s: &Scenario, ns: &[f64], out: &Path) -> Result<Outcome> {
    let (part, datum) = prepare(s)?;
    let t = match s.run.t_final {
        Horizon::Fixed(t) => t,
        Horizon::Auto(_) => bail!("the uniqueness sweep needs a fixed horizon"),
    };
    let sweep = uniqueness_sweep(&part, &datum.q0, &datum.u0, ns, t, s.law()?, s.run.sample_stride)?;
    let lines: Vec<UniquenessLine> = sweep
        .rows
        .iter()
        .map(|r| UniquenessLine {
            n: r.n,
            n_ref: r.n_ref,
            beta_delta: r.terminal.beta_delta,
            beta_delta_log: r.terminal.beta_delta_log,
            dq_cl: r.terminal.dq_cl,
            w: r.terminal.w,
            osgood: r.terminal.osgood,
            gronwall_factor: r.gronwall_factor,
            v: r.v,
        })
        .collect();
    let dir = RunDir::create(out, &s.name)?;
    dir.write_config(s)?;
    dir.write_table("uniqueness.csv", &lines)?;
    dir.write_json("uniqueness.json", &sweep)?;
    println!(
        "uniqueness sweep to T = {t} with dt = {:.4e} -> {}",
        sweep.dt,
        dir.path.display()
    );
    println!(
        "{:>8} {:>8} {:>12} {:>12} {:>12} {:>12}",
        "n", "2n", "β_δ(T)", "log route", "Osgood", "c₀e^{CV}"
    );
    for l in &lines {
        println!(
            "{:>8} {:>8} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
            l.n, l.n_ref, l.beta_delta, l.beta_delta_log, l.osgood, l.gronwall_factor
        );
    }
    println!(
        "strictly decreasing in n: {}",
        if sweep.strictly_decreasing() { "yes" } else { "no" }
    );
    Ok(Outcome::Ok)
}

pub struct DampingArgs {
    pub pressure: f64,
    pub nu: f64,
    pub horizon: f64,
    pub low_below: f64,
    pub high_from: f64,
}

pub fn sweep_damping(name: &str, a: &DampingArgs, out: &Path) -> Result<Outcome> {
    let sweep = damping_sweep(a.pressure, a.nu, a.horizon, a.low_below, a.high_from);
    let dir = RunDir::create(out, name)?;
    dir.write_table("damping.csv", &sweep.report.rows)?;
    dir.write_json("damping.json", &sweep)?;
    println!(
        "damping sweep P'(1) = {}, ν = {} -> {}",
        a.pressure,
        a.nu,
        dir.path.display()
    );
    println!("{:>12} {:>12}", "|ξ|", "rate");
    for r in &sweep.report.rows {
        println!("{:>12.4e} {:>12.6e}", r.wavenumber, r.rate);
    }
    println!(
        "crossover {:.4}, saturation {:.4}; low-|ξ| slope {:.4}; high-|ξ| spread {:.2}%",
        sweep.report.threshold,
        sweep.report.saturation,
        sweep.low_slope,
        100.0 * sweep.high_spread
    );
    Ok(Outcome::Ok)
}

pub fn sweep_convergence(s: &Scenario, dt0: f64, out: &Path) -> Result<Outcome> {
    let (_, datum) = prepare(s)?;
    let t = match s.run.t_final {
        Horizon::Fixed(t) => t,
        Horizon::Auto(_) => bail!("the convergence sweep needs a fixed horizon"),
    };
    let r = temporal_convergence(&datum.q0, &datum.u0, s.n_trunc(), s.law()?, t, dt0, &[1, 2, 4], 16)?;
    let dir = RunDir::create(out, &s.name)?;
    dir.write_config(s)?;
    dir.write_json("convergence.json", &r)?;
    println!(
        "temporal self-convergence to T = {t} against dt = {:.4e} -> {}",
        r.reference_dt,
        dir.path.display()
    );
    for (dt, e) in r.dts.iter().zip(&r.errors) {
        println!("  dt = {dt:.4e}  error = {e:.4e}");
    }
    println!(
        "  slopes {:?}",
        r.slopes.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>()
    );
    Ok(Outcome::Ok)
}
