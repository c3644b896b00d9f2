//! Per-sample estimate functionals of a run, built as a fold over samples.
//!
//! Chemin-Lerner `L̃^∞_t` norms keep a running per-block supremum; `L¹_t`
//! norms integrate the instantaneous Besov norm with the trapezoid rule on
//! the sample times.

use serde::{Deserialize, Serialize};

use crate::friedrichs::{SolverState, Trajectory};
use crate::littlewood_paley::{BesovIndex, DyadicPartition};
use crate::spectral::{differentiate, DiffOp, Exponent, SpectralField};

const P2: Exponent = Exponent::Finite(2.0);
const R1: Exponent = Exponent::Finite(1.0);
const R2: Exponent = Exponent::Finite(2.0);

/// One ledger row. Column names are the CSV header.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub time: f64,
    /// `‖q‖_{L̃^∞_t B^{d/2}_{2,1}}`.
    pub q_cl: f64,
    /// `‖ū‖_{L̃^∞_t B^{d/2−1}_{2,1}}`.
    pub ubar_cl: f64,
    /// `‖ū‖_{L¹_t B^{d/2+1}_{2,1}}`.
    pub ubar_l1: f64,
    /// `ubar_cl + ubar_l1`.
    pub beta: f64,
    /// `∫₀ᵗ (‖ū‖_{B^{d/2+1}_{2,1}} + ‖∇u_L‖_{B^{d/2}_{2,2} ∩ B^0_{∞,1}} + ‖div u_L‖_{B^{d/2}_{2,1}})`.
    pub v: f64,
    /// `∫₀ᵗ (‖∇u_L‖_{B^{d/2}_{2,2} ∩ B^0_{∞,1}} + ‖div u_L‖_{B^{d/2}_{2,1}})`.
    pub h1: f64,
    /// `‖u_L‖_{L̃^∞_t B^{d/2−1}_{2,2}}`.
    pub ul_cl_22: f64,
    /// `‖u_L‖_{L̃^∞_t B^{−1}_{∞,1}}`.
    pub ul_cl_inf: f64,
    /// `‖u_L‖_{L¹_t B^{d/2+1}_{2,2}}`.
    pub ul_l1_22: f64,
    /// `‖u_L‖_{L¹_t B^1_{∞,1}}`.
    pub ul_l1_inf: f64,
    /// `‖div u_L‖_{L̃^∞_t B^{d/2−2}_{2,1}}`.
    pub div_ul_cl: f64,
    /// `‖div u_L‖_{L¹_t B^{d/2}_{2,1}}`.
    pub div_ul_l1: f64,
    pub min_density: f64,
    /// `|q̂(0)|`.
    pub q_mean: f64,
    /// Largest coefficient of `u − (u_L + ū)`.
    pub split_defect: f64,
}

/// All per-sample rows of a run plus the block range they were computed on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateLedger {
    pub dim: usize,
    pub j_min: i32,
    pub j_max: i32,
    /// `‖J_n q₀‖_{B^{d/2}_{2,1}}`.
    pub q0_norm: f64,
    /// `‖J_n u₀‖_{B^{d/2−1}_{2,2}} + ‖J_n u₀‖_{B^{−1}_{∞,1}}`.
    pub u0_norm: f64,
    /// Block profiles at the last sample: `2^{j(d/2+1)}‖Δ_j ū‖_{L¹_t L²}`
    /// and the same for `u_L`, for ℓ¹-versus-ℓ² tail comparisons.
    pub ubar_l1_profile: Vec<f64>,
    pub ul_l1_profile: Vec<f64>,
    pub outside_theorem_hypotheses: bool,
    pub rows: Vec<LedgerRow>,
}

impl EstimateLedger {
    pub fn last(&self) -> &LedgerRow {
        self.rows.last().expect("a ledger holds at least one row")
    }

    /// `‖ū‖_{L¹_T B^{d/2+1}_{2,1}}` next to `‖u_L‖_{L¹_T B^{d/2+1}_{2,2}}`.
    pub fn regularity_pair(&self) -> (f64, f64) {
        let r = self.last();
        (r.ubar_l1, r.ul_l1_22)
    }

    pub fn is_monotone(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].beta >= w[0].beta && w[1].v >= w[0].v && w[1].h1 >= w[0].h1)
    }

    /// CSV column order, matching the field order of [`LedgerRow`].
    pub fn column_names() -> &'static [&'static str] {
        &[
            "time",
            "q_cl",
            "ubar_cl",
            "ubar_l1",
            "beta",
            "v",
            "h1",
            "ul_cl_22",
            "ul_cl_inf",
            "ul_l1_22",
            "ul_l1_inf",
            "div_ul_cl",
            "div_ul_l1",
            "min_density",
            "q_mean",
            "split_defect",
        ]
    }
}

struct Instant {
    time: f64,
    ubar_hi: f64,
    grad_ul: f64,
    div_ul: f64,
    ul_22_hi: f64,
    ul_inf_hi: f64,
    ubar_blocks_hi: Vec<f64>,
    ul_blocks_hi: Vec<f64>,
}

/// Incremental ledger construction.
pub struct LedgerBuilder<'a> {
    part: &'a DyadicPartition,
    d: f64,
    sup_q: Vec<f64>,
    sup_ubar: Vec<f64>,
    sup_ul2: Vec<f64>,
    sup_ulinf: Vec<f64>,
    sup_div: Vec<f64>,
    int_ubar: f64,
    int_grad: f64,
    int_div: f64,
    int_ul22: f64,
    int_ulinf: f64,
    prof_ubar: Vec<f64>,
    prof_ul: Vec<f64>,
    prev: Option<Instant>,
    q0_norm: f64,
    u0_norm: f64,
    rows: Vec<LedgerRow>,
}

fn sup_in_place(acc: &mut [f64], x: &[f64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a = a.max(*b);
    }
}

impl<'a> LedgerBuilder<'a> {
    pub fn new(part: &'a DyadicPartition) -> Self {
        let nb = part.block_count();
        LedgerBuilder {
            part,
            d: part.grid().dim() as f64,
            sup_q: vec![0.0; nb],
            sup_ubar: vec![0.0; nb],
            sup_ul2: vec![0.0; nb],
            sup_ulinf: vec![0.0; nb],
            sup_div: vec![0.0; nb],
            int_ubar: 0.0,
            int_grad: 0.0,
            int_div: 0.0,
            int_ul22: 0.0,
            int_ulinf: 0.0,
            prof_ubar: vec![0.0; nb],
            prof_ul: vec![0.0; nb],
            prev: None,
            q0_norm: 0.0,
            u0_norm: 0.0,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, s: &SolverState) {
        let part = self.part;
        let d = self.d;
        let weighted = |b: &[f64], sc: f64| -> Vec<f64> {
            b.iter()
                .enumerate()
                .map(|(k, x)| 2f64.powf((part.j_min() + k as i32) as f64 * sc) * x)
                .collect()
        };

        let q_b = part.block_norms(&s.q, P2);
        let ubar_b = part.block_norms(&s.u_bar, P2);
        let ul_b2 = part.block_norms(&s.u_l, P2);
        let ul_binf = part.block_norms(&s.u_l, Exponent::Infinite);
        let div_ul = differentiate(&s.u_l, DiffOp::Divergence).expect("state velocity is a d-vector");
        let grad_ul = differentiate(&s.u_l, DiffOp::Gradient).expect("state velocity is a d-vector");
        let div_b = part.block_norms(&div_ul, P2);
        let grad_b2 = part.block_norms(&grad_ul, P2);
        let grad_binf = part.block_norms(&grad_ul, Exponent::Infinite);

        sup_in_place(&mut self.sup_q, &q_b);
        sup_in_place(&mut self.sup_ubar, &ubar_b);
        sup_in_place(&mut self.sup_ul2, &ul_b2);
        sup_in_place(&mut self.sup_ulinf, &ul_binf);
        sup_in_place(&mut self.sup_div, &div_b);

        let ubar_blocks_hi = weighted(&ubar_b, d / 2.0 + 1.0);
        let ul_blocks_hi = weighted(&ul_b2, d / 2.0 + 1.0);
        let now = Instant {
            time: s.time,
            ubar_hi: ubar_blocks_hi.iter().sum(),
            grad_ul: part.weighted_sum(&grad_b2, d / 2.0, R2) + part.weighted_sum(&grad_binf, 0.0, R1),
            div_ul: part.weighted_sum(&div_b, d / 2.0, R1),
            ul_22_hi: part.weighted_sum(&ul_b2, d / 2.0 + 1.0, R2),
            ul_inf_hi: part.weighted_sum(&ul_binf, 1.0, R1),
            ubar_blocks_hi,
            ul_blocks_hi,
        };
        match &self.prev {
            None => {
                self.q0_norm = part.weighted_sum(&q_b, d / 2.0, R1);
                self.u0_norm = part.weighted_sum(&ul_b2, d / 2.0 - 1.0, R2) + part.weighted_sum(&ul_binf, -1.0, R1);
            }
            Some(p) => {
                let h = 0.5 * (now.time - p.time);
                self.int_ubar += h * (p.ubar_hi + now.ubar_hi);
                self.int_grad += h * (p.grad_ul + now.grad_ul);
                self.int_div += h * (p.div_ul + now.div_ul);
                self.int_ul22 += h * (p.ul_22_hi + now.ul_22_hi);
                self.int_ulinf += h * (p.ul_inf_hi + now.ul_inf_hi);
                for k in 0..self.prof_ubar.len() {
                    self.prof_ubar[k] += h * (p.ubar_blocks_hi[k] + now.ubar_blocks_hi[k]);
                    self.prof_ul[k] += h * (p.ul_blocks_hi[k] + now.ul_blocks_hi[k]);
                }
            }
        }
        let ubar_cl = part.weighted_sum(&self.sup_ubar, d / 2.0 - 1.0, R1);
        let h1 = self.int_grad + self.int_div;
        self.rows.push(LedgerRow {
            time: s.time,
            q_cl: part.weighted_sum(&self.sup_q, d / 2.0, R1),
            ubar_cl,
            ubar_l1: self.int_ubar,
            beta: ubar_cl + self.int_ubar,
            v: self.int_ubar + h1,
            h1,
            ul_cl_22: part.weighted_sum(&self.sup_ul2, d / 2.0 - 1.0, R2),
            ul_cl_inf: part.weighted_sum(&self.sup_ulinf, -1.0, R1),
            ul_l1_22: self.int_ul22,
            ul_l1_inf: self.int_ulinf,
            div_ul_cl: part.weighted_sum(&self.sup_div, d / 2.0 - 2.0, R1),
            div_ul_l1: self.int_div,
            min_density: s.min_density(),
            q_mean: s.mean_defect(),
            split_defect: s.split_defect(),
        });
        self.prev = Some(now);
    }

    pub fn rows(&self) -> &[LedgerRow] {
        &self.rows
    }

    pub fn finish(self) -> EstimateLedger {
        EstimateLedger {
            dim: self.part.grid().dim(),
            j_min: self.part.j_min(),
            j_max: self.part.j_max(),
            q0_norm: self.q0_norm,
            u0_norm: self.u0_norm,
            ubar_l1_profile: self.prof_ubar,
            ul_l1_profile: self.prof_ul,
            outside_theorem_hypotheses: self.part.grid().outside_theorem_hypotheses(),
            rows: self.rows,
        }
    }
}

/// Ledger of a stored trajectory.
pub fn build_ledger(part: &DyadicPartition, traj: &Trajectory) -> EstimateLedger {
    let mut b = LedgerBuilder::new(part);
    for s in &traj.states {
        b.push(s);
    }
    b.finish()
}

/// Smallest `C ≥ 0` with `‖q‖_{L̃^∞_t B^{d/2}_{2,1}} ≤ e^{C V(t)} (1 + ‖q₀‖) − 1`
/// at every sample. Infinite when the density norm grows while `V = 0`.
pub fn measure_density_constant(ledger: &EstimateLedger) -> f64 {
    let q0 = ledger.q0_norm;
    let mut c = 0.0f64;
    for r in &ledger.rows {
        let ratio = (1.0 + r.q_cl) / (1.0 + q0);
        if ratio <= 1.0 {
            continue;
        }
        if r.v > 0.0 {
            c = c.max(ratio.ln() / r.v);
        } else {
            return f64::INFINITY;
        }
    }
    c
}

/// Norms of the hypothesis quantities of a datum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisNorms {
    /// `‖q₀‖_{B^{d/2}_{2,1}}`.
    pub q0_crit: f64,
    /// `‖q₀‖_{B^{d/2−1}_{2,1}}`.
    pub q0_low: f64,
    /// `‖u₀‖_{B^{d/2−1}_{2,2}}`.
    pub u0_22: f64,
    /// `‖u₀‖_{B^{−1}_{∞,1}}`.
    pub u0_inf: f64,
    /// `‖div u₀‖_{B^{d/2−2}_{2,1}}`.
    pub div_u0: f64,
    pub min_density: f64,
    /// `|q̂₀(0)|`, excluded from every Besov sum.
    pub q0_mean: f64,
}

pub fn hypothesis_norms(part: &DyadicPartition, q0: &SpectralField, u0: &SpectralField) -> HypothesisNorms {
    let d = part.grid().dim() as f64;
    let div = differentiate(u0, DiffOp::Divergence).expect("velocity is a d-vector");
    HypothesisNorms {
        q0_crit: part.besov_norm(q0, &BesovIndex::l2_sum(d / 2.0)),
        q0_low: part.besov_norm(q0, &BesovIndex::l2_sum(d / 2.0 - 1.0)),
        u0_22: part.besov_norm(u0, &BesovIndex::l2_square(d / 2.0 - 1.0)),
        u0_inf: part.besov_norm(
            u0,
            &BesovIndex {
                s: -1.0,
                p: Exponent::Infinite,
                r: R1,
                rho: None,
            },
        ),
        div_u0: part.besov_norm(&div, &BesovIndex::l2_sum(d / 2.0 - 2.0)),
        min_density: 1.0 + q0.physical_min(0),
        q0_mean: q0.mean(0).norm(),
    }
}
