//! Gap functionals between two runs sharing grid, sample times and `u_L`.

use serde::{Deserialize, Serialize};

use crate::diagnostics::ledger::{EstimateLedger, LedgerBuilder};
use crate::error::{Error, Result};
use crate::friedrichs::{dt_max, Physics, PressureLaw, SolverState, Stepper, Trajectory};
use crate::littlewood_paley::DyadicPartition;
use crate::spectral::{Exponent, SpectralField};

const P2: Exponent = Exponent::Finite(2.0);
const R1: Exponent = Exponent::Finite(1.0);

/// `r log(e + W/r)`, written so that neither tiny `r` nor huge `W` overflows.
pub fn osgood_modulus(r: f64, w: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    if w <= 0.0 {
        return r;
    }
    let e = std::f64::consts::E;
    r * (w.ln() - r.ln() + (e * r / w).ln_1p())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub time: f64,
    /// `‖δq‖_{L̃^∞_t B^{d/2−1}_{2,1}}`.
    pub dq_cl: f64,
    /// `‖δū‖_{L̃^∞_t B^{d/2−2}_{2,1}}`.
    pub dubar_cl: f64,
    /// `‖δū‖_{L¹_t B^{d/2}_{2,1}}`.
    pub dubar_l1: f64,
    pub beta_delta: f64,
    /// `‖δū‖_{L̃^∞_t B^{−1}_{2,∞}}`.
    pub dubar_cl_log: f64,
    /// `‖δū‖_{L¹_t B^1_{2,∞}}`.
    pub dubar_l1_log: f64,
    /// Sum of the two previous columns.
    pub beta_delta_log: f64,
    /// `Σ_i ‖ū_i‖_{L¹_t B^0_{2,∞}} + ‖ū_i‖_{L¹_t B^2_{2,∞}}`.
    pub w: f64,
    /// `osgood_modulus(beta_delta_log, w)`.
    pub osgood: f64,
    /// `dq_cl / dubar_l1`; zero while both vanish.
    pub ratio: f64,
    /// Largest coefficient of `u_L¹ − u_L²`.
    pub ul_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapLedger {
    pub dim: usize,
    pub rows: Vec<GapRow>,
}

impl GapLedger {
    pub fn terminal(&self) -> &GapRow {
        self.rows.last().expect("a gap ledger holds at least one row")
    }

    /// Measured `c₀ e^{CV(t)}` of the Gronwall-form bound: the largest
    /// `dq_cl / dubar_l1` over the samples.
    pub fn gronwall_factor(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).fold(0.0, f64::max)
    }

    pub fn column_names() -> &'static [&'static str] {
        &[
            "time",
            "dq_cl",
            "dubar_cl",
            "dubar_l1",
            "beta_delta",
            "dubar_cl_log",
            "dubar_l1_log",
            "beta_delta_log",
            "w",
            "osgood",
            "ratio",
            "ul_defect",
        ]
    }
}

struct GapInstant {
    time: f64,
    dub_crit: f64,
    dub_log: f64,
    w: f64,
}

pub struct GapBuilder<'a> {
    part: &'a DyadicPartition,
    sup_dq: Vec<f64>,
    sup_dub: Vec<f64>,
    int_crit: f64,
    int_log: f64,
    int_w: f64,
    prev: Option<GapInstant>,
    rows: Vec<GapRow>,
}

impl<'a> GapBuilder<'a> {
    pub fn new(part: &'a DyadicPartition) -> Self {
        let nb = part.block_count();
        GapBuilder {
            part,
            sup_dq: vec![0.0; nb],
            sup_dub: vec![0.0; nb],
            int_crit: 0.0,
            int_log: 0.0,
            int_w: 0.0,
            prev: None,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, a: &SolverState, b: &SolverState) -> Result<()> {
        if a.grid() != b.grid() || a.grid() != self.part.grid() {
            return Err(Error::usage("paired states live on different grids"));
        }
        if a.time != b.time {
            return Err(Error::usage(format!(
                "paired samples at different times {} and {}",
                a.time, b.time
            )));
        }
        if let Some(p) = &self.prev {
            if a.time <= p.time {
                return Err(Error::usage("paired sample times must increase"));
            }
        }
        let part = self.part;
        let d = part.grid().dim() as f64;
        let dq = a.q.sub(&b.q)?;
        let dub = a.u_bar.sub(&b.u_bar)?;
        let dq_b = part.block_norms(&dq, P2);
        let dub_b = part.block_norms(&dub, P2);
        for (s, x) in self.sup_dq.iter_mut().zip(&dq_b) {
            *s = s.max(*x);
        }
        for (s, x) in self.sup_dub.iter_mut().zip(&dub_b) {
            *s = s.max(*x);
        }
        let w_of = |u: &SpectralField| {
            let b = part.block_norms(u, P2);
            part.weighted_sum(&b, 0.0, Exponent::Infinite) + part.weighted_sum(&b, 2.0, Exponent::Infinite)
        };
        let now = GapInstant {
            time: a.time,
            dub_crit: part.weighted_sum(&dub_b, d / 2.0, R1),
            dub_log: part.weighted_sum(&dub_b, 1.0, Exponent::Infinite),
            w: w_of(&a.u_bar) + w_of(&b.u_bar),
        };
        if let Some(p) = &self.prev {
            let h = 0.5 * (now.time - p.time);
            self.int_crit += h * (p.dub_crit + now.dub_crit);
            self.int_log += h * (p.dub_log + now.dub_log);
            self.int_w += h * (p.w + now.w);
        }
        let dq_cl = part.weighted_sum(&self.sup_dq, d / 2.0 - 1.0, R1);
        let dubar_cl = part.weighted_sum(&self.sup_dub, d / 2.0 - 2.0, R1);
        let dubar_cl_log = part.weighted_sum(&self.sup_dub, -1.0, Exponent::Infinite);
        let beta_delta_log = dubar_cl_log + self.int_log;
        let ratio = if self.int_crit > 0.0 {
            dq_cl / self.int_crit
        } else if dq_cl == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        self.rows.push(GapRow {
            time: a.time,
            dq_cl,
            dubar_cl,
            dubar_l1: self.int_crit,
            beta_delta: dubar_cl + self.int_crit,
            dubar_cl_log,
            dubar_l1_log: self.int_log,
            beta_delta_log,
            w: self.int_w,
            osgood: osgood_modulus(beta_delta_log, self.int_w),
            ratio,
            ul_defect: a.u_l.sub(&b.u_l)?.max_abs_coefficient(),
        });
        self.prev = Some(now);
        Ok(())
    }

    pub fn finish(self) -> GapLedger {
        GapLedger {
            dim: self.part.grid().dim(),
            rows: self.rows,
        }
    }
}

/// Gap ledger of two stored trajectories with identical sample times.
pub fn uniqueness_gap(part: &DyadicPartition, run1: &Trajectory, run2: &Trajectory) -> Result<GapLedger> {
    if run1.states.len() != run2.states.len() {
        return Err(Error::usage(format!(
            "runs hold {} and {} samples",
            run1.states.len(),
            run2.states.len()
        )));
    }
    let mut b = GapBuilder::new(part);
    for (a, c) in run1.states.iter().zip(&run2.states) {
        b.push(a, c)?;
    }
    Ok(b.finish())
}

/// One side of a paired run.
#[derive(Clone, Debug)]
pub struct PairMember<'a> {
    pub q0: &'a SpectralField,
    pub u0: &'a SpectralField,
    pub n: f64,
}

#[derive(Clone, Debug)]
pub struct PairedRun {
    pub gap: GapLedger,
    pub ledger1: EstimateLedger,
    pub ledger2: EstimateLedger,
    pub dt: f64,
    pub steps: usize,
}

/// Advances both members in lockstep with the same fixed step, so that every
/// sample time agrees exactly, and folds the gap and both estimate ledgers
/// without storing the trajectories.
#[allow(clippy::too_many_arguments)]
pub fn run_paired(
    part: &DyadicPartition,
    m1: PairMember<'_>,
    m2: PairMember<'_>,
    t_final: f64,
    dt: f64,
    law: PressureLaw,
    physics: Physics,
    sample_stride: usize,
) -> Result<PairedRun> {
    if !(t_final > 0.0 && dt > 0.0 && sample_stride > 0) {
        return Err(Error::usage("paired run needs T > 0, dt > 0 and a positive stride"));
    }
    let steps = ((t_final / dt) - 1e-9).ceil().max(1.0) as usize;
    let h = t_final / steps as f64;
    let grid = *part.grid();
    let mut s1 = SolverState::initial(m1.q0, m1.u0, m1.n)?;
    let mut s2 = SolverState::initial(m2.q0, m2.u0, m2.n)?;
    let st1 = Stepper::new(&grid, h, m1.n, law, physics)?;
    let st2 = Stepper::new(&grid, h, m2.n, law, physics)?;
    let mut gap = GapBuilder::new(part);
    let mut l1 = LedgerBuilder::new(part);
    let mut l2 = LedgerBuilder::new(part);
    gap.push(&s1, &s2)?;
    l1.push(&s1);
    l2.push(&s2);
    for k in 1..=steps {
        let limit = dt_max(m1.n, s1.u.sup_norm()).min(dt_max(m2.n, s2.u.sup_norm()));
        if h > limit {
            return Err(Error::StepSize { dt: h, dt_max: limit });
        }
        s1 = st1.advance(&s1)?;
        s2 = st2.advance(&s2)?;
        // Land both exactly on the same grid of times.
        let t = k as f64 * h;
        s1.time = t;
        s2.time = t;
        if k % sample_stride == 0 || k == steps {
            gap.push(&s1, &s2)?;
            l1.push(&s1);
            l2.push(&s2);
        }
    }
    Ok(PairedRun {
        gap: gap.finish(),
        ledger1: l1.finish(),
        ledger2: l2.finish(),
        dt: h,
        steps,
    })
}
