//! Exact Fourier propagators: heat flow, the Lamé flow `e^{t𝒜}`, Duhamel
//! integration against piecewise-linear forcing, and the coupled
//! density-velocity linear system.
//!
//! The coupled system is
//!
//! ```text
//! ∂_t q + div u = 0
//! ∂_t u − ν_s Δu − (ν − ν_s) ∇div u + P ∇q = 0
//! ```
//!
//! with solenoidal viscosity `ν_s = 1`. Per mode, with `w = ξ̂·û` and
//! `v = i w`, the pair `(q̂, v)` obeys the real system
//! `[[0, −|ξ|], [P|ξ|, −ν|ξ|²]]` and the solenoidal part decays like
//! `exp(−|ξ|² t)`. `ν = 1` is the damping system with a plain Laplacian;
//! `ν = 2` couples density to the Lamé operator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::littlewood_paley::{BesovIndex, DyadicPartition, FieldSeries};
use crate::spectral::{PeriodicGrid, SpectralField};

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::usage(format!(
            "flow time must be finite and nonnegative, got {t}"
        )))
    }
}

/// `exp(μ t Δ) u`.
pub fn heat_flow(u: &SpectralField, t: f64, mu: f64) -> Result<SpectralField> {
    check_time(t)?;
    let g = *u.grid();
    let mut out = u.apply_symbol(|i| (-mu * g.wavenumber(i).powi(2) * t).exp());
    out.flag_mean_zero(u.is_mean_zero());
    Ok(out)
}

/// Per-mode factors of `e^{t𝒜}`: `û ↦ a û + b ξ(ξ·û)`.
#[derive(Clone, Debug)]
pub struct LamePropagator {
    grid: PeriodicGrid,
    t: f64,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl LamePropagator {
    pub fn new(grid: &PeriodicGrid, t: f64) -> Result<Self> {
        check_time(t)?;
        let mut a = vec![1.0; grid.len()];
        let mut b = vec![0.0; grid.len()];
        for i in 1..grid.len() {
            let k2 = grid.wavenumber(i).powi(2);
            let e1 = (-k2 * t).exp();
            let e2 = (-2.0 * k2 * t).exp();
            a[i] = e1;
            b[i] = (e2 - e1) / k2;
        }
        Ok(LamePropagator { grid: *grid, t, a, b })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn apply(&self, u: &SpectralField) -> Result<SpectralField> {
        let d = self.grid.dim();
        if u.grid() != &self.grid || u.ncomp() != d {
            return Err(Error::usage("Lamé flow needs a d-vector on the propagator's grid"));
        }
        let mut out = u.clone();
        for i in 0..self.grid.len() {
            let xi = self.grid.wavevector(i);
            let mut dot = Complex64::new(0.0, 0.0);
            for c in 0..d {
                dot += u.component(c)[i] * xi[c];
            }
            for c in 0..d {
                out.component_mut(c)[i] = u.component(c)[i] * self.a[i] + dot * (self.b[i] * xi[c]);
            }
        }
        Ok(out)
    }
}

/// `e^{t𝒜} u₀`: solenoidal part times `exp(−|ξ|²t)`, potential part times
/// `exp(−2|ξ|²t)`.
pub fn lame_flow(u0: &SpectralField, t: f64) -> Result<SpectralField> {
    LamePropagator::new(u0.grid(), t)?.apply(u0)
}

/// `(e^z − 1)/z` and `(e^z − 1 − z)/z²`, with series near zero.
pub fn phi_functions(z: f64) -> (f64, f64) {
    if z.abs() < 1e-3 {
        let z2 = z * z;
        let p1 = 1.0 + z / 2.0 + z2 / 6.0 + z2 * z / 24.0 + z2 * z2 / 120.0;
        let p2 = 0.5 + z / 6.0 + z2 / 24.0 + z2 * z / 120.0 + z2 * z2 / 720.0;
        (p1, p2)
    } else {
        let em1 = z.exp_m1();
        (em1 / z, (em1 - z) / (z * z))
    }
}

/// Linear generator for [`duhamel`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Generator {
    /// `μΔ`, any arity.
    Heat { mu: f64 },
    /// `𝒜 = Δ + ∇div`, d-vectors.
    Lame,
}

/// `u(t) = e^{tL}u₀ + ∫₀ᵗ e^{(t−τ)L} f(τ) dτ` with `f` linear between
/// samples, integrated exactly per mode. The forcing must start at `τ = 0`
/// and reach `t`.
pub fn duhamel(u0: &SpectralField, forcing: &FieldSeries, t: f64, gen: Generator) -> Result<SpectralField> {
    check_time(t)?;
    let times = forcing.times();
    let (first, last) = (times[0], *times.last().expect("series is nonempty"));
    let slack = 1e-12 * t.max(1.0);
    if first.abs() > slack || last < t - slack {
        return Err(Error::usage(format!(
            "forcing mesh [{first}, {last}] does not cover [0, {t}]"
        )));
    }
    let f0 = &forcing.fields()[0];
    if f0.grid() != u0.grid() || f0.ncomp() != u0.ncomp() {
        return Err(Error::usage("forcing and data differ in grid or arity"));
    }
    let grid = *u0.grid();
    let d = grid.dim();
    if gen == Generator::Lame && u0.ncomp() != d {
        return Err(Error::usage("Lamé Duhamel needs a d-vector"));
    }
    let mut u = u0.clone();
    for k in 0..times.len() - 1 {
        let (ta, tb) = (times[k], times[k + 1]);
        if ta >= t {
            break;
        }
        let end = tb.min(t);
        let h = end - ta;
        let fa = &forcing.fields()[k];
        // Forcing at the (possibly truncated) segment end.
        let theta = (end - ta) / (tb - ta);
        let fb = fa.scaled(1.0 - theta).add(&forcing.fields()[k + 1].scaled(theta))?;
        u = duhamel_segment(&grid, &u, fa, &fb, h, gen);
    }
    Ok(u)
}

fn duhamel_segment(
    grid: &PeriodicGrid,
    u: &SpectralField,
    fa: &SpectralField,
    fb: &SpectralField,
    h: f64,
    gen: Generator,
) -> SpectralField {
    let mut out = u.clone();
    let step = |lambda: f64, u: Complex64, fa: Complex64, fb: Complex64| {
        let z = -lambda * h;
        let (p1, p2) = phi_functions(z);
        u * z.exp() + (fa * p1 + (fb - fa) * p2) * h
    };
    match gen {
        Generator::Heat { mu } => {
            for c in 0..u.ncomp() {
                for i in 0..grid.len() {
                    let lam = mu * grid.wavenumber(i).powi(2);
                    out.component_mut(c)[i] = step(lam, u.component(c)[i], fa.component(c)[i], fb.component(c)[i]);
                }
            }
        }
        Generator::Lame => {
            let d = grid.dim();
            for i in 0..grid.len() {
                let xi = grid.wavevector(i);
                let k2 = xi[0] * xi[0] + xi[1] * xi[1];
                let proj = |f: &SpectralField| -> Complex64 {
                    if k2 == 0.0 {
                        return Complex64::new(0.0, 0.0);
                    }
                    (0..d).map(|c| f.component(c)[i] * xi[c]).sum::<Complex64>() / k2.sqrt()
                };
                let (wu, wa, wb) = (proj(u), proj(fa), proj(fb));
                let wn = step(2.0 * k2, wu, wa, wb);
                let xh = if k2 == 0.0 {
                    [0.0; 2]
                } else {
                    [xi[0] / k2.sqrt(), xi[1] / k2.sqrt()]
                };
                for c in 0..d {
                    let su = u.component(c)[i] - wu * xh[c];
                    let sa = fa.component(c)[i] - wa * xh[c];
                    let sb = fb.component(c)[i] - wb * xh[c];
                    out.component_mut(c)[i] = step(k2, su, sa, sb) + wn * xh[c];
                }
            }
        }
    }
    out
}

fn sinhc_cosh(z: Complex64) -> (Complex64, Complex64) {
    // sinh(z)/z and cosh(z) by series; used for |z| < 0.1.
    let z2 = z * z;
    let mut term_s = Complex64::new(1.0, 0.0);
    let mut term_c = Complex64::new(1.0, 0.0);
    let mut s = term_s;
    let mut c = term_c;
    for k in 1..10 {
        let kf = k as f64;
        term_s = term_s * z2 / ((2.0 * kf) * (2.0 * kf + 1.0));
        term_c = term_c * z2 / ((2.0 * kf - 1.0) * (2.0 * kf));
        s += term_s;
        c += term_c;
    }
    (s, c)
}

/// `exp(t M)` for `M = [[0, −k], [p k, −ν k²]]`.
///
/// With `m = tr M / 2` and `δ = √(m² − det M)`,
/// `exp(tM) = e^{mt} (cosh(δt) I + sinh(δt)/δ (M − mI))`, evaluated through
/// `e^{(m±δ)t}` away from the crossover and through the series when `|δt|`
/// is small, which covers the defective case at `k = 2√p/ν`.
pub fn coupled_block_exponential(k: f64, p: f64, nu: f64, t: f64) -> [[f64; 2]; 2] {
    let m = [[0.0, -k], [p * k, -nu * k * k]];
    let half_tr = -0.5 * nu * k * k;
    let det = p * k * k;
    let delta = Complex64::new(half_tr * half_tr - det, 0.0).sqrt();
    let z = delta * t;
    let (c, s_over_delta) = if z.norm() < 0.1 {
        let (sc, ch) = sinhc_cosh(z);
        let e = (half_tr * t).exp();
        (ch * e, sc * (e * t))
    } else {
        let ep = ((half_tr + delta) * t).exp();
        let em = ((half_tr - delta) * t).exp();
        ((ep + em) * 0.5, (ep - em) / (delta * 2.0))
    };
    let mut out = [[0.0; 2]; 2];
    for r in 0..2 {
        for col in 0..2 {
            let shifted = m[r][col] - if r == col { half_tr } else { 0.0 };
            let id = if r == col { c } else { Complex64::new(0.0, 0.0) };
            out[r][col] = (id + s_over_delta * shifted).re;
        }
    }
    out
}

/// Cached per-mode propagator of the coupled system for a fixed time.
#[derive(Clone, Debug)]
pub struct CoupledPropagator {
    grid: PeriodicGrid,
    blocks: Vec<[[f64; 2]; 2]>,
    heat: Vec<f64>,
}

impl CoupledPropagator {
    pub fn new(grid: &PeriodicGrid, t: f64, pressure: f64, nu: f64) -> Result<Self> {
        check_time(t)?;
        let mut blocks = Vec::with_capacity(grid.len());
        let mut heat = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let k = grid.wavenumber(i);
            blocks.push(coupled_block_exponential(k, pressure, nu, t));
            heat.push((-k * k * t).exp());
        }
        Ok(CoupledPropagator {
            grid: *grid,
            blocks,
            heat,
        })
    }

    pub fn apply(&self, q: &SpectralField, u: &SpectralField) -> Result<(SpectralField, SpectralField)> {
        let g = &self.grid;
        let d = g.dim();
        if q.grid() != g || u.grid() != g || q.ncomp() != 1 || u.ncomp() != d {
            return Err(Error::usage("coupled flow needs a scalar and a d-vector on one grid"));
        }
        let mut qo = q.clone();
        let mut uo = u.clone();
        let i_unit = Complex64::new(0.0, 1.0);
        for i in 0..g.len() {
            let xi = g.wavevector(i);
            let k = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
            if k == 0.0 {
                continue;
            }
            let xh = [xi[0] / k, xi[1] / k];
            let w: Complex64 = (0..d).map(|c| u.component(c)[i] * xh[c]).sum();
            let v = w * i_unit;
            let qh = q.component(0)[i];
            let m = &self.blocks[i];
            let qn = qh * m[0][0] + v * m[0][1];
            let vn = qh * m[1][0] + v * m[1][1];
            let wn = -vn * i_unit;
            qo.component_mut(0)[i] = qn;
            for c in 0..d {
                let sol = u.component(c)[i] - w * xh[c];
                uo.component_mut(c)[i] = sol * self.heat[i] + wn * xh[c];
            }
        }
        Ok((qo, uo))
    }
}

/// Exact flow of the coupled linear system from `(q₀, u₀)` over time `t`.
pub fn coupled_linear_flow(
    q0: &SpectralField,
    u0: &SpectralField,
    t: f64,
    pressure: f64,
    nu: f64,
) -> Result<(SpectralField, SpectralField)> {
    if !(pressure > 0.0) {
        log::warn!("pressure coefficient {pressure} ≤ 0: outside the damping regime");
    }
    CoupledPropagator::new(q0.grid(), t, pressure, nu)?.apply(q0, u0)
}

/// Decay rate of the density mode at one wavenumber: `−ln ρ(M(t)) / t`
/// with `ρ` the spectral radius of the exact block propagator.
pub fn damping_rate(k: f64, pressure: f64, nu: f64, t: f64) -> f64 {
    let m = coupled_block_exponential(k, pressure, nu, t);
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = Complex64::new(0.25 * tr * tr - det, 0.0).sqrt();
    let l1 = (Complex64::new(0.5 * tr, 0.0) + disc).norm();
    let l2 = (Complex64::new(0.5 * tr, 0.0) - disc).norm();
    -l1.max(l2).ln() / t
}

/// One row of a damping sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DampingRow {
    pub wavenumber: f64,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DampingReport {
    pub pressure: f64,
    pub nu: f64,
    pub horizon: f64,
    pub rows: Vec<DampingRow>,
    /// Crossover `2√P/ν` between the parabolic and damped regimes.
    pub threshold: f64,
    /// High-frequency saturation value `P/ν`.
    pub saturation: f64,
    /// `P ≤ 0`: no damping of high frequencies is expected.
    pub degenerate: bool,
}

pub fn damping_report(wavenumbers: &[f64], pressure: f64, nu: f64, horizon: f64) -> DampingReport {
    let rows = wavenumbers
        .iter()
        .map(|&k| DampingRow {
            wavenumber: k,
            rate: damping_rate(k, pressure, nu, horizon),
        })
        .collect();
    DampingReport {
        pressure,
        nu,
        horizon,
        rows,
        threshold: 2.0 * pressure.max(0.0).sqrt() / nu,
        saturation: pressure / nu,
        degenerate: !(pressure > 0.0),
    }
}

/// Least-squares slope of `ln rate` against `ln k`.
pub fn log_log_slope(rows: &[DampingRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.wavenumber.ln(), r.rate.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Heat solution of `∂_t u − μΔu = f` sampled at the forcing times.
pub fn heat_trajectory(u0: &SpectralField, forcing: &FieldSeries, mu: f64) -> Result<FieldSeries> {
    let times = forcing.times();
    if times[0] != 0.0 {
        return Err(Error::usage("forcing must start at t = 0"));
    }
    let grid = *u0.grid();
    let mut fields = vec![u0.clone()];
    let mut u = u0.clone();
    for k in 0..times.len() - 1 {
        let h = times[k + 1] - times[k];
        u = duhamel_segment(
            &grid,
            &u,
            &forcing.fields()[k],
            &forcing.fields()[k + 1],
            h,
            Generator::Heat { mu },
        );
        fields.push(u.clone());
    }
    FieldSeries::new(times.to_vec(), fields)
}

/// Ratio of the two sides of the heat smoothing estimate
///
/// ```text
/// ‖u‖_{L̃^{ρ₁}_T B^{s+2/ρ₁}_{2,1}} ≤ C (‖u₀‖_{B^s_{2,1}} + μ^{1/ρ₂−1} ‖f‖_{L̃^{ρ₂}_T B^{s−2+2/ρ₂}_{2,1}})
/// ```
///
/// for one datum, with the solution sampled at the forcing times.
pub fn heat_smoothing_ratio(
    part: &DyadicPartition,
    u0: &SpectralField,
    forcing: &FieldSeries,
    mu: f64,
    s: f64,
    rho1: f64,
    rho2: f64,
) -> Result<f64> {
    if !(1.0 <= rho2 && rho2 <= rho1) {
        return Err(Error::usage("heat estimate needs 1 ≤ ρ₂ ≤ ρ₁ ≤ ∞"));
    }
    let traj = heat_trajectory(u0, forcing, mu)?;
    let inv = |r: f64| if r.is_infinite() { 0.0 } else { 1.0 / r };
    let lhs_idx = BesovIndex::l2_sum(s + 2.0 * inv(rho1)).with_time(rho1)?;
    let f_idx = BesovIndex::l2_sum(s - 2.0 + 2.0 * inv(rho2)).with_time(rho2)?;
    let lhs = part.chemin_lerner_norm(&traj, &lhs_idx)?;
    let rhs = part.besov_norm(u0, &BesovIndex::l2_sum(s))
        + mu.powf(inv(rho2) - 1.0) * part.chemin_lerner_norm(forcing, &f_idx)?;
    Ok(if rhs == 0.0 { 0.0 } else { lhs / rhs })
}
