//! Acceptance criteria A1–A8. Each test writes one `PASS`/`FAIL` line to
//! stderr (bypassing the harness capture) and then asserts.

use std::io::Write;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use swbench::diagnostics::scenario::{auto_horizon_run, AutoOptions};
use swbench::diagnostics::suites::smoothing_constant;
use swbench::diagnostics::sweeps::{damping_sweep, temporal_convergence, uniqueness_sweep};
use swbench::diagnostics::uniqueness::osgood_modulus;
use swbench::friedrichs::{run, Physics, PressureLaw, RunConfig, Termination};
use swbench::initial_data::InitialData;
use swbench::littlewood_paley::{make_partition, DyadicPartition};
use swbench::paraproduct::{bony_split, random_pairs};
use swbench::semigroup::{coupled_linear_flow, heat_flow, lame_flow};
use swbench::spectral::{differentiate, random_field, DiffOp, PaddedGrid};
use swbench::{PeriodicGrid, SpectralField};

// A1
const PARTITION_RESIDUAL: f64 = 1e-10;
const BERNSTEIN_LOW: f64 = 3.0 / 4.0;
const BERNSTEIN_HIGH: f64 = 8.0 / 3.0;
const BERNSTEIN_SLACK: f64 = 1e-6;
const A1_FIELDS: usize = 100;
const A1_BUDGET: Duration = Duration::from_secs(10);
// A2
const BONY_RELATIVE: f64 = 1e-11;
const A2_PAIRS: usize = 100;
const A2_BUDGET: Duration = Duration::from_secs(30);
// A3
const A3_ETA: f64 = 0.1;
const A3_TARGET: f64 = 0.05;
const A3_BUDGET: Duration = Duration::from_secs(600);
// A4
const FLOW_MODEWISE: f64 = 1e-12;
const SMOOTHING_SPREAD: f64 = 0.2;
// A5
const A5_BUDGET: Duration = Duration::from_secs(600);
const OSGOOD_FLOOR: f64 = 1e-12;
// A6
const DAMPING_TOLERANCE: f64 = 0.1;
const DAMPING_HIGH_FROM: f64 = 8.0;
const DAMPING_LOW_BELOW: f64 = 0.5;
const A6_BUDGET: Duration = Duration::from_secs(60);
// A7
const ORDER: f64 = 4.0;
const ORDER_TOLERANCE: f64 = 0.3;
// A8
const MEAN_DEFECT: f64 = 1e-13;
const SPLIT_DEFECT: f64 = 1e-12;
const DIV_HEAT: f64 = 1e-12;

fn verdict(id: &str, pass: bool, detail: String) {
    let line = format!("{id} {}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "{id} failed: {detail}");
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn grid(n: usize) -> PeriodicGrid {
    PeriodicGrid::new(2, n).unwrap()
}

/// `‖f‖₂` by quadrature on the physical grid.
fn physical_l2(f: &SpectralField) -> f64 {
    let g = f.grid();
    let s: f64 = f.to_physical().iter().flatten().map(|x| x * x).sum();
    (s * g.cell_volume()).sqrt()
}

#[test]
fn a1_partition_and_blocks() {
    let start = Instant::now();
    let mut residual = 0.0f64;
    let mut overlap = 0.0f64;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for n in [32, 64, 128] {
        let g = grid(n);
        let part = DyadicPartition::new(&g);
        let mut sum = vec![0.0; g.len()];
        for j in part.j_range() {
            for &(i, w) in part.weights(j) {
                sum[i] += w;
            }
        }
        for s in sum.iter().skip(1) {
            residual = residual.max((s - 1.0).abs());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        for f in 0..A1_FIELDS {
            let u = random_field(g, 1, &mut rng, |k| 1.0 / (1.0 + k));
            let du = differentiate(&u, DiffOp::Gradient).unwrap();
            for j in part.j_range() {
                let b = part.block_field(&u, j);
                if f < 3 {
                    for k in part.j_range().filter(|k| (k - j).abs() >= 2) {
                        overlap = overlap.max(part.block_field(&b, k).max_abs_coefficient());
                    }
                }
                let nb = physical_l2(&b);
                if nb > 1e-12 * u.max_abs_coefficient() {
                    let ratio = physical_l2(&part.block_field(&du, j)) / (2f64.powi(j) * nb);
                    lo = lo.min(ratio);
                    hi = hi.max(ratio);
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = residual <= PARTITION_RESIDUAL
        && overlap == 0.0
        && lo >= BERNSTEIN_LOW * (1.0 - BERNSTEIN_SLACK)
        && hi <= BERNSTEIN_HIGH * (1.0 + BERNSTEIN_SLACK)
        && elapsed < A1_BUDGET;
    verdict(
        "A1",
        pass,
        format!(
            "residual {residual:.2e} (≤ {PARTITION_RESIDUAL:e}), far-block overlap {overlap:e}, \
             Bernstein ratio in [{lo:.4}, {hi:.4}] ⊂ [{:.4}, {:.4}], {elapsed:.1?}",
            BERNSTEIN_LOW * (1.0 - BERNSTEIN_SLACK),
            BERNSTEIN_HIGH * (1.0 + BERNSTEIN_SLACK)
        ),
    );
}

#[test]
fn a2_bony_identity() {
    let start = Instant::now();
    let g = grid(64);
    let part = make_partition(&g);
    let pad = PaddedGrid::double(&g);
    let mut worst = 0.0f64;
    for (u, v) in random_pairs(g, A2_PAIRS, 2024) {
        // Exact product on the doubled grid, truncated back.
        let pu = pad.to_physical(u.component(0));
        let pv = pad.to_physical(v.component(0));
        let prod: Vec<f64> = pu.iter().zip(&pv).map(|(a, b)| a * b).collect();
        let oracle = SpectralField::from_components(g, vec![pad.from_physical(&prod)]).unwrap();
        let total = bony_split(&part, &u, &v).unwrap().total();
        worst = worst.max(total.sub(&oracle).unwrap().l2_norm() / oracle.l2_norm());
    }
    let elapsed = start.elapsed();
    verdict(
        "A2",
        worst <= BONY_RELATIVE && elapsed < A2_BUDGET,
        format!("max relative defect {worst:.2e} (≤ {BONY_RELATIVE:e}) over {A2_PAIRS} pairs, {elapsed:.1?}"),
    );
}

#[test]
fn a3_small_data_instance() {
    let start = Instant::now();
    let g = grid(128);
    let part = make_partition(&g);
    let n = 128.0 / 3.0;
    let datum = InitialData::Multiscale {
        q_target: A3_TARGET,
        u_target: A3_TARGET,
        decay: 0.5,
        j_lo: 0,
        j_hi: 5,
        k_max: n,
        seed: 1,
    }
    .generate(&part)
    .unwrap();
    let opts = AutoOptions {
        eta: A3_ETA,
        ..AutoOptions::default()
    };
    let run = auto_horizon_run(&part, &datum.q0, &datum.u0, n, PressureLaw::shallow_water(), &opts).unwrap();
    let elapsed = start.elapsed();
    let beta = run.report.conclusion("beta").cloned();
    let pass = run.termination == Termination::Completed
        && run.t_auto > 0.0
        && run.report.hypotheses_hold()
        && beta.as_ref().is_some_and(|b| b.holds)
        && elapsed < A3_BUDGET;
    let detail = match &beta {
        Some(b) => format!(
            "‖q₀‖ = {:.4}, ‖u₀‖ = {:.4}, m = {}, C = {:.4}, T = {:.3e}: β(T) = {:.3e} ≤ 2η = {} (margin {:.3e}), {elapsed:.1?}",
            datum.norms.q0_crit, datum.norms.u0_22, run.m, run.c, run.t_auto, b.lhs, b.rhs, b.margin
        ),
        None => format!("hypotheses failed: {:?}", run.report.first_violation),
    };
    verdict("A3", pass, detail);
}

type Block = [[Complex64; 3]; 3];

/// Taylor exponential with scaling and squaring of the 3×3 per-mode
/// generator of `∂_t q = −div u`, `∂_t u = Δu + (ν−1)∇div u − P∇q`.
fn mode_exponential(xi: [f64; 2], p: f64, nu: f64, t: f64) -> Block {
    let i = Complex64::new(0.0, 1.0);
    let z = Complex64::new(0.0, 0.0);
    let k2 = xi[0] * xi[0] + xi[1] * xi[1];
    let mut a: Block = [[z; 3]; 3];
    a[0][1] = -i * xi[0];
    a[0][2] = -i * xi[1];
    for r in 0..2 {
        a[r + 1][0] = -i * p * xi[r];
        for c in 0..2 {
            let delta = if r == c { 1.0 } else { 0.0 };
            a[r + 1][c + 1] = Complex64::new(-k2 * delta - (nu - 1.0) * xi[r] * xi[c], 0.0);
        }
    }
    let norm = a.iter().flatten().map(|x| x.norm() * t).fold(0.0, f64::max);
    let sq = (norm.log2().ceil().max(0.0) as i32) + 4;
    let h = t / 2f64.powi(sq);
    let mul = |x: &Block, y: &Block| {
        let mut o = [[z; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                o[r][c] = (0..3).map(|k| x[r][k] * y[k][c]).sum();
            }
        }
        o
    };
    let mut sum: Block = [[z; 3]; 3];
    for (r, row) in sum.iter_mut().enumerate() {
        row[r] = Complex64::new(1.0, 0.0);
    }
    let mut term = sum;
    let ah = a.map(|row| row.map(|x| x * h));
    for k in 1..25 {
        term = mul(&term, &ah);
        for row in term.iter_mut() {
            for x in row.iter_mut() {
                *x /= k as f64;
            }
        }
        for r in 0..3 {
            for c in 0..3 {
                sum[r][c] += term[r][c];
            }
        }
    }
    for _ in 0..sq {
        sum = mul(&sum, &sum);
    }
    sum
}

/// Largest coefficient error of `(q, u)` against the 3×3 oracle; `rows`
/// selects the compared unknowns (`1..3` for velocity-only flows).
#[allow(clippy::too_many_arguments)]
fn flow_error(
    q0: &SpectralField,
    u0: &SpectralField,
    q: &SpectralField,
    u: &SpectralField,
    p: f64,
    nu: f64,
    t: f64,
    rows: std::ops::Range<usize>,
) -> f64 {
    let g = q0.grid();
    let mut err = 0.0f64;
    for m in 0..g.len() {
        if g.is_nyquist(m) {
            continue;
        }
        let e = mode_exponential(g.wavevector(m), p, nu, t);
        let x = [q0.component(0)[m], u0.component(0)[m], u0.component(1)[m]];
        let y = [q.component(0)[m], u.component(0)[m], u.component(1)[m]];
        for r in rows.clone() {
            let want: Complex64 = (0..3).map(|c| e[r][c] * x[c]).sum();
            err = err.max((y[r] - want).norm());
        }
    }
    err
}

#[test]
fn a4_semigroup_exactness_and_smoothing() {
    let g = grid(32);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let q0 = random_field(g, 1, &mut rng, |k| (-0.02 * k * k).exp());
    let u0 = random_field(g, 2, &mut rng, |k| (-0.02 * k * k).exp());
    let t = 0.37;
    let zero_q = SpectralField::zeros(g, 1);

    let mut err = 0.0f64;
    let lame = lame_flow(&u0, t).unwrap();
    err = err.max(flow_error(&zero_q, &u0, &zero_q, &lame, 0.0, 2.0, t, 1..3));
    let heat = heat_flow(&u0, t, 1.0).unwrap();
    err = err.max(flow_error(&zero_q, &u0, &zero_q, &heat, 0.0, 1.0, t, 1..3));
    for (p, nu) in [(1.0, 1.0), (2.0, 2.0), (0.3, 2.0)] {
        let (q, u) = coupled_linear_flow(&q0, &u0, t, p, nu).unwrap();
        err = err.max(flow_error(&q0, &u0, &q, &u, p, nu, t, 0..3));
    }

    let consts: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&n| smoothing_constant(grid(n)).unwrap())
        .collect();
    let cmax = consts.iter().cloned().fold(0.0, f64::max);
    let cmin = consts.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = (cmax - cmin) / cmin;
    verdict(
        "A4",
        err <= FLOW_MODEWISE && consts.iter().all(|c| c.is_finite() && *c > 0.0) && spread < SMOOTHING_SPREAD,
        format!(
            "mode-wise flow error {err:.2e} (≤ {FLOW_MODEWISE:e}); smoothing constants {consts:.4?}, spread {:.2}% (< {}%)",
            100.0 * spread,
            100.0 * SMOOTHING_SPREAD
        ),
    );
}

#[test]
fn a5_uniqueness_contraction() {
    let start = Instant::now();
    let g = grid(128);
    let part = make_partition(&g);
    // Band-limited inside J_16 so every truncation sees the same data and u_L.
    let datum = InitialData::Multiscale {
        q_target: 0.3,
        u_target: 0.3,
        decay: 1.0,
        j_lo: 0,
        j_hi: 3,
        k_max: 15.9,
        seed: 3,
    }
    .generate(&part)
    .unwrap();
    let sweep = uniqueness_sweep(
        &part,
        &datum.q0,
        &datum.u0,
        &[16.0, 32.0, 64.0],
        0.5,
        PressureLaw::default(),
        5,
    )
    .unwrap();
    let elapsed = start.elapsed();
    let gaps: Vec<f64> = sweep.rows.iter().map(|r| r.terminal.beta_delta).collect();
    let log_gaps: Vec<f64> = sweep.rows.iter().map(|r| r.terminal.beta_delta_log).collect();
    let factors: Vec<f64> = sweep.rows.iter().map(|r| r.gronwall_factor).collect();
    let same_ul = sweep.rows.iter().all(|r| r.terminal.ul_defect == 0.0);
    let w = sweep.rows[0].terminal.w;
    let mut osgood_ok = sweep
        .rows
        .iter()
        .all(|r| r.terminal.osgood.is_finite() && r.terminal.osgood >= 0.0);
    let mut r = 1e-2;
    while r >= OSGOOD_FLOOR {
        let m = osgood_modulus(r, w);
        osgood_ok &= m.is_finite() && m >= r;
        r /= 10.0;
    }
    let decreasing = |v: &[f64]| v.windows(2).all(|p| p[1] < p[0]);
    let pass = sweep.strictly_decreasing()
        && decreasing(&log_gaps)
        && factors.iter().all(|f| f.is_finite())
        && same_ul
        && osgood_ok
        && elapsed < A5_BUDGET;
    verdict(
        "A5",
        pass,
        format!(
            "β_δ(T) for n = 16, 32, 64: {}; log-route gaps {}; c₀e^{{CV}} {factors:.3?}; \
             Osgood finite down to {OSGOOD_FLOOR:e}: {osgood_ok}, {elapsed:.1?}",
            sci(&gaps),
            sci(&log_gaps)
        ),
    );
}

#[test]
fn a6_damping_structure() {
    let start = Instant::now();
    let (p, nu) = (1.0, 1.0);
    let sweep = damping_sweep(p, nu, 1.0, DAMPING_LOW_BELOW, DAMPING_HIGH_FROM);
    // Oracle: largest real part of the eigenvalues of [[0, −k], [Pk, −νk²]].
    let oracle = |k: f64| {
        let disc = nu * nu * k.powi(4) - 4.0 * p * k * k;
        if disc >= 0.0 {
            (nu * k * k - disc.sqrt()) / 2.0
        } else {
            nu * k * k / 2.0
        }
    };
    let mut oracle_dev = 0.0f64;
    for r in &sweep.report.rows {
        oracle_dev = oracle_dev.max((r.rate - oracle(r.wavenumber)).abs() / oracle(r.wavenumber));
    }
    let high: Vec<f64> = sweep
        .report
        .rows
        .iter()
        .filter(|r| r.wavenumber >= DAMPING_HIGH_FROM)
        .map(|r| r.rate)
        .collect();
    let low: Vec<(f64, f64)> = sweep
        .report
        .rows
        .iter()
        .filter(|r| r.wavenumber <= DAMPING_LOW_BELOW)
        .map(|r| (r.wavenumber, r.rate))
        .collect();
    let c = low.iter().map(|(k, r)| r * k * k).sum::<f64>() / low.iter().map(|(k, _)| k.powi(4)).sum::<f64>();
    let low_fit = low
        .iter()
        .map(|(k, r)| (r / (c * k * k) - 1.0).abs())
        .fold(0.0, f64::max);

    // Field-level decay of a single density mode on a wide box.
    let box_grid =
        PeriodicGrid::with_periods(2, 64, &[std::f64::consts::PI / 4.0, 2.0 * std::f64::consts::PI]).unwrap();
    let mut field_rates = Vec::new();
    for k in [1.0, 2.0, 3.0] {
        let q0 = SpectralField::from_fn(box_grid, 1, |x, _| (8.0 * k * x[0]).cos());
        let u0 = SpectralField::zeros(box_grid, 2);
        let norm = |t: f64| coupled_linear_flow(&q0, &u0, t, p, nu).unwrap().0.l2_norm();
        field_rates.push((norm(2.0) / norm(4.0)).ln() / 2.0);
    }
    let all_high: Vec<f64> = high.iter().chain(&field_rates).cloned().collect();
    let hmax = all_high.iter().cloned().fold(0.0, f64::max);
    let hmin = all_high.iter().cloned().fold(f64::INFINITY, f64::min);
    let elapsed = start.elapsed();
    let pass = hmin > 0.0
        && (hmax - hmin) / hmax <= DAMPING_TOLERANCE
        && low_fit <= DAMPING_TOLERANCE
        && (sweep.low_slope - 2.0).abs() <= 2.0 * DAMPING_TOLERANCE
        && oracle_dev <= 1e-6
        && elapsed < A6_BUDGET;
    verdict(
        "A6",
        pass,
        format!(
            "high-|ξ| rates in [{hmin:.4}, {hmax:.4}] (spread {:.2}%), field-level {field_rates:.4?}; \
             low-|ξ| fit c|ξ|² with c = {c:.4}, worst deviation {:.2}%, slope {:.4}; oracle deviation {oracle_dev:.1e}, {elapsed:.1?}",
            100.0 * (hmax - hmin) / hmax,
            100.0 * low_fit,
            sweep.low_slope
        ),
    );
}

#[test]
fn a7_temporal_order() {
    let g = grid(32);
    let part = make_partition(&g);
    let datum = InitialData::Trig {
        a_q: 0.2,
        a_s: 0.2,
        a_c: 0.2,
    }
    .generate(&part)
    .unwrap();
    let rep = temporal_convergence(
        &datum.q0,
        &datum.u0,
        10.0,
        PressureLaw::default(),
        0.2,
        0.01,
        &[1, 2, 4],
        16,
    )
    .unwrap();
    let pass = rep.slopes.len() == 2 && rep.slopes.iter().all(|s| (s - ORDER).abs() <= ORDER_TOLERANCE);
    verdict(
        "A7",
        pass,
        format!(
            "errors {} at dt {:?}, slopes {:.3?} (4 ± {ORDER_TOLERANCE})",
            sci(&rep.errors),
            rep.dts,
            rep.slopes
        ),
    );
}

#[test]
fn a8_structural_invariants() {
    let g = grid(32);
    let part = make_partition(&g);
    let families = [
        InitialData::Trig {
            a_q: 0.2,
            a_s: 0.2,
            a_c: 0.2,
        },
        InitialData::Multiscale {
            q_target: 0.2,
            u_target: 0.2,
            decay: 0.7,
            j_lo: 0,
            j_hi: 3,
            k_max: 10.0,
            seed: 8,
        },
        InitialData::NearVacuum { rho_min: 0.3, a_u: 0.1 },
    ];
    let (mut mean, mut split, mut heat) = (0.0f64, 0.0f64, 0.0f64);
    for fam in &families {
        let d = fam.generate(&part).unwrap();
        let div0 = differentiate(
            &swbench::littlewood_paley::friedrichs_truncate(&d.u0, 10.0),
            DiffOp::Divergence,
        )
        .unwrap();
        for physics in [Physics::FULL, Physics::LINEAR_ONLY] {
            let mut cfg = RunConfig::new(0.3, 10.0);
            cfg.physics = physics;
            cfg.dt = Some(0.01);
            let traj = run(&d.q0, &d.u0, &cfg).unwrap();
            for s in &traj.states {
                mean = mean.max(s.mean_defect());
                split = split.max(s.split_defect());
                let div_l = differentiate(&s.u_l, DiffOp::Divergence).unwrap();
                let div = differentiate(&s.u, DiffOp::Divergence).unwrap();
                let mut worst = 0.0f64;
                for m in 0..g.len() {
                    let k2 = g.wavenumber(m).powi(2);
                    let want = div0.component(0)[m] * (-2.0 * k2 * s.time).exp();
                    worst = worst.max((div_l.component(0)[m] - want).norm());
                    if physics == Physics::LINEAR_ONLY {
                        worst = worst.max((div.component(0)[m] - want).norm());
                    }
                }
                heat = heat.max(worst);
            }
        }
    }
    verdict(
        "A8",
        mean <= MEAN_DEFECT && split <= SPLIT_DEFECT && heat <= DIV_HEAT,
        format!(
            "max |q̂(0)| {mean:.2e} (≤ {MEAN_DEFECT:e}), max split defect {split:.2e} (≤ {SPLIT_DEFECT:e}), \
             div u_L vs diffusivity-2 heat {heat:.2e} (≤ {DIV_HEAT:e})"
        ),
    );
}
