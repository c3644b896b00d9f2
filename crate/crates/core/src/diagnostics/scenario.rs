//! Runs whose horizon is fixed by the smallness conditions themselves.
//!
//! A pilot run measures the density-growth constant `C` and the integrals
//! `V(t)`, `H1(t)`; the horizon is the largest time at which `H1` and `H2`
//! hold for that `C`. The run to that horizon then re-measures `C`, and the
//! procedure repeats until the horizon is admissible for the largest
//! constant seen.

use serde::{Deserialize, Serialize};

use crate::diagnostics::apriori::{admissible_horizon, check_apriori, select_cutoff, AprioriReport};
use crate::diagnostics::ledger::{measure_density_constant, EstimateLedger, LedgerBuilder};
use crate::error::{Error, Result};
use crate::friedrichs::{run_with, Physics, PressureLaw, Retain, RunConfig, Termination};
use crate::littlewood_paley::DyadicPartition;
use crate::spectral::SpectralField;

const BACKOFF: f64 = 1.0 - 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutoOptions {
    pub eta: f64,
    /// First pilot horizon; doubled while every sampled time is admissible.
    pub pilot_horizon: f64,
    /// Steps per run (pilot and final).
    pub steps: usize,
    pub max_iterations: usize,
}

impl Default for AutoOptions {
    fn default() -> Self {
        AutoOptions {
            eta: 0.1,
            pilot_horizon: 1e-4,
            steps: 40,
            max_iterations: 8,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AutoRun {
    pub m: i32,
    pub t_auto: f64,
    pub c: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub report: AprioriReport,
    pub ledger: EstimateLedger,
}

/// Runs `(q0, u0)` to `t_final` with `steps` equal steps and folds the ledger.
#[allow(clippy::too_many_arguments)]
pub fn ledger_run(
    part: &DyadicPartition,
    q0: &SpectralField,
    u0: &SpectralField,
    n: f64,
    law: PressureLaw,
    physics: Physics,
    t_final: f64,
    steps: usize,
) -> Result<(EstimateLedger, Termination)> {
    let mut cfg = RunConfig::new(t_final, n);
    cfg.law = law;
    cfg.physics = physics;
    cfg.dt = Some(t_final / steps.max(1) as f64);
    cfg.survey = true;
    cfg.retain = Retain::Endpoints;
    let mut b = LedgerBuilder::new(part);
    let traj = run_with(q0, u0, &cfg, |s| b.push(s))?;
    Ok((b.finish(), traj.termination))
}

pub fn auto_horizon_run(
    part: &DyadicPartition,
    q0: &SpectralField,
    u0: &SpectralField,
    n: f64,
    law: PressureLaw,
    opts: &AutoOptions,
) -> Result<AutoRun> {
    let eta = opts.eta;
    let m = select_cutoff(part, q0, eta)?;
    let physics = Physics::FULL;

    let mut horizon = opts.pilot_horizon;
    let (mut pilot, mut c);
    loop {
        let (l, term) = ledger_run(part, q0, u0, n, law, physics, horizon, opts.steps)?;
        if term != Termination::Completed {
            return Err(Error::usage(format!("pilot run stopped early: {term:?}")));
        }
        c = measure_density_constant(&l);
        let t = admissible_horizon(&l, eta, m, c);
        pilot = l;
        if t < horizon || horizon > 1e3 {
            break;
        }
        horizon *= 2.0;
    }
    // Back off from the boundary so round-off in the final ledger cannot
    // tip an inequality that holds with equality at the crossing.
    let mut t_auto = admissible_horizon(&pilot, eta, m, c) * BACKOFF;
    let initial = check_apriori(&pilot, eta, m, Some(c));
    if !initial.hypotheses[0].holds || t_auto <= 0.0 {
        // No positive horizon exists: report the violation on the pilot.
        return Ok(AutoRun {
            m,
            t_auto: 0.0,
            c,
            iterations: 0,
            termination: Termination::Completed,
            report: initial,
            ledger: pilot,
        });
    }
    let mut iterations = 0;
    loop {
        iterations += 1;
        let (ledger, termination) = ledger_run(part, q0, u0, n, law, physics, t_auto, opts.steps)?;
        let c_run = measure_density_constant(&ledger);
        let c_new = c.max(c_run);
        let t_new = admissible_horizon(&ledger, eta, m, c_new);
        let report = check_apriori(&ledger, eta, m, Some(c_new));
        let settled = c_run <= c && report.hypotheses_hold();
        if settled || iterations >= opts.max_iterations || termination != Termination::Completed {
            return Ok(AutoRun {
                m,
                t_auto,
                c: c_new,
                iterations,
                termination,
                report,
                ledger,
            });
        }
        c = c_new;
        t_auto = t_new.min(t_auto) * BACKOFF;
        if t_auto <= 0.0 {
            let report = check_apriori(&ledger, eta, m, Some(c));
            return Ok(AutoRun {
                m,
                t_auto,
                c,
                iterations,
                termination,
                report,
                ledger,
            });
        }
    }
}
