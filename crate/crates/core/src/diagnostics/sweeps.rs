//! Parameter sweeps. Each member run is independent and deterministic;
//! members are fanned out with rayon and collected in input order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::uniqueness::{run_paired, GapRow, PairMember};
use crate::error::{Error, Result};
use crate::friedrichs::{dt_default, run, Physics, PressureLaw, RunConfig, SolverState};
use crate::littlewood_paley::{BesovIndex, DyadicPartition};
use crate::semigroup::{coupled_linear_flow, damping_report, log_log_slope, DampingReport};
use crate::spectral::{Exponent, SpectralField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub t_final: f64,
    pub dts: Vec<f64>,
    pub reference_dt: f64,
    /// `‖q − q_ref‖₂ + ‖u − u_ref‖₂` at the final time.
    pub errors: Vec<f64>,
    /// `log₂(e_k / e_{k+1})`.
    pub slopes: Vec<f64>,
}

fn state_distance(a: &SolverState, b: &SolverState) -> f64 {
    let dq = a.q.sub(&b.q).expect("same shape").l2_norm();
    let du = a.u.sub(&b.u).expect("same shape").l2_norm();
    dq + du
}

/// Self-convergence against a run with step `dt0 / reference_divisor`.
#[allow(clippy::too_many_arguments)]
pub fn temporal_convergence(
    q0: &SpectralField,
    u0: &SpectralField,
    n: f64,
    law: PressureLaw,
    t_final: f64,
    dt0: f64,
    divisors: &[usize],
    reference_divisor: usize,
) -> Result<ConvergenceReport> {
    let mut all: Vec<usize> = divisors.to_vec();
    all.push(reference_divisor);
    let finals: Vec<Result<SolverState>> = all
        .par_iter()
        .map(|&k| {
            let mut cfg = RunConfig::new(t_final, n);
            cfg.law = law;
            cfg.dt = Some(dt0 / k as f64);
            cfg.retain = crate::friedrichs::Retain::Endpoints;
            let traj = run(q0, u0, &cfg)?;
            if traj.dt != dt0 / k as f64 {
                return Err(Error::usage("step halving changed the convergence ladder"));
            }
            Ok(traj.last().clone())
        })
        .collect();
    let mut finals = finals.into_iter().collect::<Result<Vec<_>>>()?;
    let reference = finals.pop().expect("reference run present");
    let errors: Vec<f64> = finals.iter().map(|s| state_distance(s, &reference)).collect();
    let slopes = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(ConvergenceReport {
        t_final,
        dts: divisors.iter().map(|&k| dt0 / k as f64).collect(),
        reference_dt: dt0 / reference_divisor as f64,
        errors,
        slopes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessRow {
    pub n: f64,
    pub n_ref: f64,
    pub terminal: GapRow,
    pub gronwall_factor: f64,
    /// `V(T)` of the coarser run.
    pub v: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessSweep {
    pub t_final: f64,
    pub dt: f64,
    pub rows: Vec<UniquenessRow>,
}

impl UniquenessSweep {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].terminal.beta_delta < w[0].terminal.beta_delta)
    }
}

/// Gaps between the truncations `n` and `2n` of the same datum, with one
/// common step (stable for the largest truncation) for every pair.
pub fn uniqueness_sweep(
    part: &DyadicPartition,
    q0: &SpectralField,
    u0: &SpectralField,
    ns: &[f64],
    t_final: f64,
    law: PressureLaw,
    sample_stride: usize,
) -> Result<UniquenessSweep> {
    if ns.is_empty() {
        return Err(Error::usage("uniqueness sweep needs at least one truncation"));
    }
    let n_top = ns.iter().cloned().fold(0.0, f64::max) * 2.0;
    let dt = dt_default(n_top, u0.sup_norm());
    let steps = (t_final / dt).ceil().max(1.0);
    let dt = t_final / steps;
    let rows: Vec<Result<UniquenessRow>> = ns
        .par_iter()
        .map(|&n| {
            let pr = run_paired(
                part,
                PairMember { q0, u0, n },
                PairMember { q0, u0, n: 2.0 * n },
                t_final,
                dt,
                law,
                Physics::FULL,
                sample_stride,
            )?;
            Ok(UniquenessRow {
                n,
                n_ref: 2.0 * n,
                gronwall_factor: pr.gap.gronwall_factor(),
                terminal: pr.gap.terminal().clone(),
                v: pr.ledger1.last().v,
            })
        })
        .collect();
    Ok(UniquenessSweep {
        t_final,
        dt,
        rows: rows.into_iter().collect::<Result<Vec<_>>>()?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub delta0: f64,
    /// `‖δq(0)‖_{B^{d/2−1}_{2,1}}`.
    pub initial_gap: f64,
    /// `‖δq‖_{L̃^∞_T B^{d/2−1}_{2,1}} + β_δ(T)`.
    pub terminal_gap: f64,
    pub v: f64,
    /// `ln(terminal_gap / initial_gap) / V(T)`, or zero when the gap did not grow.
    pub c_gap: f64,
}

/// Gap growth after perturbing `q0` by `delta · cos x₁` at a fixed truncation.
#[allow(clippy::too_many_arguments)]
pub fn perturbation_gap(
    part: &DyadicPartition,
    q0: &SpectralField,
    u0: &SpectralField,
    n: f64,
    delta: f64,
    t_final: f64,
    law: PressureLaw,
    sample_stride: usize,
) -> Result<PerturbationReport> {
    let g = *part.grid();
    let d = g.dim() as f64;
    let bump = SpectralField::from_fn(g, 1, |x, _| delta * x[0].cos());
    let q1 = q0.add(&bump)?;
    let dt = dt_default(n, u0.sup_norm());
    let pr = run_paired(
        part,
        PairMember { q0: &q1, u0, n },
        PairMember { q0, u0, n },
        t_final,
        dt,
        law,
        Physics::FULL,
        sample_stride,
    )?;
    let initial_gap = part.besov_norm(&bump, &BesovIndex::l2_sum(d / 2.0 - 1.0));
    let t = pr.gap.terminal();
    let terminal_gap = t.dq_cl + t.beta_delta;
    let v = pr.ledger2.last().v;
    let growth = (terminal_gap / initial_gap).ln();
    Ok(PerturbationReport {
        delta0: delta,
        initial_gap,
        terminal_gap,
        v,
        c_gap: if growth > 0.0 && v > 0.0 { growth / v } else { 0.0 },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DampingSweep {
    pub report: DampingReport,
    /// Fitted exponent of the rate against `|ξ|` on the low modes.
    pub low_slope: f64,
    /// Relative spread `(max − min)/max` of the rate on the high modes.
    pub high_spread: f64,
    pub high_from: f64,
    pub low_below: f64,
}

/// Mode sweep of the linear density decay rate.
pub fn damping_sweep(pressure: f64, nu: f64, horizon: f64, low_below: f64, high_from: f64) -> DampingSweep {
    let mut ks: Vec<f64> = (1..=8).map(|i| low_below * i as f64 / 8.0).collect();
    ks.extend(
        (0..=24)
            .map(|i| 2f64.powf(-6.0 + i as f64 * 0.5))
            .filter(|k| *k > low_below && *k < high_from),
    );
    ks.extend((0..=12).map(|i| high_from * 2f64.powf(i as f64 * 0.5)));
    let report = damping_report(&ks, pressure, nu, horizon);
    let low: Vec<_> = report
        .rows
        .iter()
        .filter(|r| r.wavenumber <= low_below)
        .cloned()
        .collect();
    let high: Vec<f64> = report
        .rows
        .iter()
        .filter(|r| r.wavenumber >= high_from)
        .map(|r| r.rate)
        .collect();
    let hmax = high.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let hmin = high.iter().cloned().fold(f64::INFINITY, f64::min);
    DampingSweep {
        low_slope: log_log_slope(&low),
        high_spread: if hmax > 0.0 {
            (hmax - hmin) / hmax
        } else {
            f64::INFINITY
        },
        high_from,
        low_below,
        report,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HybridDecayRow {
    pub time: f64,
    /// `Σ_{j < threshold} 2^{j(d/2−1)} ‖Δ_j q‖₂`.
    pub low: f64,
    /// `Σ_{j ≥ threshold} 2^{j d/2} ‖Δ_j q‖₂`.
    pub high: f64,
}

/// Low and high parts of the hybrid norm of the linearly evolved density,
/// split at block `threshold`.
#[allow(clippy::too_many_arguments)]
pub fn hybrid_decay_table(
    part: &DyadicPartition,
    q0: &SpectralField,
    u0: &SpectralField,
    pressure: f64,
    nu: f64,
    threshold: i32,
    times: &[f64],
) -> Result<Vec<HybridDecayRow>> {
    let d = part.grid().dim() as f64;
    times
        .iter()
        .map(|&t| {
            let (q, _) = coupled_linear_flow(q0, u0, t, pressure, nu)?;
            let b = part.block_norms(&q, Exponent::Finite(2.0));
            let (mut low, mut high) = (0.0, 0.0);
            for (k, x) in b.iter().enumerate() {
                let j = part.j_min() + k as i32;
                if j < threshold {
                    low += 2f64.powf(j as f64 * (d / 2.0 - 1.0)) * x;
                } else {
                    high += 2f64.powf(j as f64 * d / 2.0) * x;
                }
            }
            Ok(HybridDecayRow { time: t, low, high })
        })
        .collect()
}
