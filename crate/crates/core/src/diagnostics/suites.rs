//! Fixed verification suites behind `verify lp|paraproduct|semigroup`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::apriori::Check;
use crate::error::Result;
use crate::friedrichs::PressureLaw;
use crate::littlewood_paley::{BesovIndex, DyadicPartition, FieldSeries, RING_INNER, RING_OUTER};
use crate::paraproduct::{
    bony_split, measure_composition_estimate, measure_difference_estimate, measure_product_estimates, random_pairs,
    ProductLaw, ScalarMap,
};
use crate::semigroup::{coupled_block_exponential, heat_flow, heat_smoothing_ratio, lame_flow};
use crate::spectral::{
    dealiased_product, differentiate, helmholtz_split, random_field, DiffOp, PeriodicGrid, SpectralField,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub grid: PeriodicGrid,
    pub checks: Vec<Check>,
    /// Measured constants reported without a threshold.
    pub measured: Vec<(String, f64)>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// Partition residual, almost orthogonality, Bernstein ratios, the
/// embedding chain and the block reconstruction on `fields` random fields.
pub fn verify_lp(grid: PeriodicGrid, fields: usize, seed: u64) -> SuiteReport {
    let part = DyadicPartition::new(&grid);
    let mut checks = vec![Check::new(
        "partition_residual",
        part.partition_residual(grid.max_wavenumber()),
        1e-10,
    )];

    let mut overlap = 0.0f64;
    for j in part.j_range() {
        for k in part.j_range().filter(|k| (k - j).abs() >= 2) {
            let wk = part.weights(k);
            for &(i, w) in part.weights(j) {
                if let Ok(p) = wk.binary_search_by_key(&i, |e| e.0) {
                    overlap = overlap.max(w * wk[p].1);
                }
            }
        }
    }
    checks.push(Check::new("almost_orthogonality", overlap, 0.0));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let (mut chain, mut recon) = (0.0f64, 0.0f64);
    for _ in 0..fields {
        let u = random_field(grid, 1, &mut rng, |k| 1.0 / (1.0 + k));
        let du = differentiate(&u, DiffOp::Gradient).expect("scalar gradient");
        let b = part.block_norms(&u, crate::spectral::Exponent::Finite(2.0));
        let db = part.block_norms(&du, crate::spectral::Exponent::Finite(2.0));
        for (k, (x, dx)) in b.iter().zip(&db).enumerate() {
            if *x > 1e-300 {
                let r = dx / (2f64.powi(part.j_min() + k as i32) * x);
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        let s = grid.dim() as f64 / 2.0 - 1.0;
        let n1 = part.besov_norm(&u, &BesovIndex::l2_sum(s));
        let n2 = part.besov_norm(&u, &BesovIndex::l2_square(s));
        let ni = part.besov_norm(&u, &BesovIndex::l2_sup(s));
        chain = chain.max((n2 - n1).max(ni - n2) / n1);
        let mut sum = SpectralField::zeros(grid, 1);
        for j in part.j_range() {
            sum.axpy(1.0, &part.block_field(&u, j)).expect("same shape");
        }
        recon = recon.max(sum.sub(&u).expect("same shape").max_abs_coefficient() / u.max_abs_coefficient());
    }
    checks.push(Check::new("bernstein_lower", RING_INNER * (1.0 - 1e-6), lo));
    checks.push(Check::new("bernstein_upper", hi, RING_OUTER * (1.0 + 1e-6)));
    checks.push(Check::new("embedding_chain", chain, 0.0));
    checks.push(Check::new("block_reconstruction", recon, 1e-13));
    SuiteReport {
        name: "lp".into(),
        grid,
        checks,
        measured: vec![("bernstein_min".into(), lo), ("bernstein_max".into(), hi)],
    }
}

/// Bony identity on random pairs and measured product/composition constants.
pub fn verify_paraproduct(grid: PeriodicGrid, pairs: usize, seed: u64) -> Result<SuiteReport> {
    let part = DyadicPartition::new(&grid);
    let set = random_pairs(grid, pairs, seed);
    let mut worst = 0.0f64;
    for (u, v) in &set {
        let total = bony_split(&part, u, v)?.total();
        let prod = dealiased_product(u, v)?;
        worst = worst.max(total.sub(&prod)?.l2_norm() / prod.l2_norm());
    }
    let d = grid.dim() as f64;
    let mut measured = Vec::new();
    let laws = [
        ("paraproduct_sup", ProductLaw::ParaproductSup { s: d / 2.0 }),
        (
            "paraproduct_negative",
            ProductLaw::ParaproductNegative { s: d / 2.0, t: -1.0 },
        ),
        (
            "remainder",
            ProductLaw::Remainder {
                s1: d / 2.0,
                s2: d / 2.0 - 1.0,
            },
        ),
    ];
    let mut checks = vec![Check::new("bony_identity", worst, 1e-11)];
    for (name, law) in laws {
        let c = measure_product_estimates(&part, &set, law)?;
        checks.push(Check::new(&format!("{name}_finite"), c, f64::MAX));
        measured.push((name.to_string(), c));
    }
    let q = set[0].0.scaled(0.2 / set[0].0.sup_norm());
    let q2 = set[1].0.scaled(0.2 / set[1].0.sup_norm());
    let comp = measure_composition_estimate(&part, &q, ScalarMap::LogOnePlus, d / 2.0)?;
    let diff = measure_difference_estimate(&part, &q, &q2, PressureLaw::default(), d / 2.0 - 1.0)?;
    checks.push(Check::new("composition_finite", comp, f64::MAX));
    checks.push(Check::new("difference_finite", diff, f64::MAX));
    measured.push(("composition_log".into(), comp));
    measured.push(("difference_pressure".into(), diff));
    Ok(SuiteReport {
        name: "paraproduct".into(),
        grid,
        checks,
        measured,
    })
}

/// Smooth datum and forcing with fixed spectral content, used to compare
/// the heat smoothing constant across grids.
pub fn smoothing_datum(grid: PeriodicGrid, samples: usize, horizon: f64) -> Result<(SpectralField, FieldSeries)> {
    let shape = move |x: [f64; 2], k: f64| {
        (1..=6)
            .map(|m| {
                let m = m as f64;
                (m * x[0] + k * x[1]).cos() / (m * m)
            })
            .sum::<f64>()
    };
    let d2 = grid.dim() == 2;
    let u0 = SpectralField::from_fn(grid, 1, |x, _| shape(x, if d2 { 1.0 } else { 0.0 }));
    let base = SpectralField::from_fn(grid, 1, |x, _| shape([x[1], x[0]], if d2 { 2.0 } else { 0.0 }));
    let times: Vec<f64> = (0..samples)
        .map(|i| horizon * i as f64 / (samples - 1) as f64)
        .collect();
    let fields = times.iter().map(|t| base.scaled((1.0 + t).recip())).collect();
    Ok((u0.with_mean_zero(), FieldSeries::new(times, fields)?))
}

/// Heat smoothing constant for `(s, ρ₁, ρ₂) = (d/2 − 1, ∞, 1)`.
pub fn smoothing_constant(grid: PeriodicGrid) -> Result<f64> {
    let part = DyadicPartition::new(&grid);
    let (u0, f) = smoothing_datum(grid, 41, 1.0)?;
    heat_smoothing_ratio(&part, &u0, &f, 1.0, grid.dim() as f64 / 2.0 - 1.0, f64::INFINITY, 1.0)
}

/// Mode-wise flow errors against closed-form multipliers, the group law of
/// the coupled block and the smoothing constant.
pub fn verify_semigroup(grid: PeriodicGrid, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_field(grid, grid.dim(), &mut rng, |k| (-0.05 * k * k).exp());
    let t = 0.37;
    let mu = 0.8;

    let h = heat_flow(&u, t, mu)?;
    let mut heat_err = 0.0f64;
    for c in 0..u.ncomp() {
        for i in 0..grid.len() {
            let k = grid.wavenumber(i);
            let exact = u.component(c)[i] * (-mu * k * k * t).exp();
            heat_err = heat_err.max((h.component(c)[i] - exact).norm());
        }
    }

    let (pot, sol) = helmholtz_split(&u)?;
    let l = lame_flow(&u, t)?;
    let mut lame_err = 0.0f64;
    for c in 0..u.ncomp() {
        for i in 0..grid.len() {
            let k = grid.wavenumber(i);
            let exact: Complex64 =
                pot.component(c)[i] * (-2.0 * k * k * t).exp() + sol.component(c)[i] * (-k * k * t).exp();
            lame_err = lame_err.max((l.component(c)[i] - exact).norm());
        }
    }

    let mut group_err = 0.0f64;
    let mut det_err = 0.0f64;
    for &k in &[0.1, 0.5, 1.0, 1.9, 2.0, 2.1, 5.0, 20.0] {
        for &nu in &[1.0, 2.0] {
            let a = coupled_block_exponential(k, 1.5, nu, 0.3);
            let b = coupled_block_exponential(k, 1.5, nu, 0.5);
            let ab = coupled_block_exponential(k, 1.5, nu, 0.8);
            for i in 0..2 {
                for j in 0..2 {
                    let prod = a[i][0] * b[0][j] + a[i][1] * b[1][j];
                    group_err = group_err.max((prod - ab[i][j]).abs());
                }
            }
            let det = ab[0][0] * ab[1][1] - ab[0][1] * ab[1][0];
            det_err = det_err.max((det - (-nu * k * k * 0.8f64).exp()).abs());
        }
    }
    let smooth = smoothing_constant(grid)?;
    Ok(SuiteReport {
        name: "semigroup".into(),
        grid,
        checks: vec![
            Check::new("heat_modewise", heat_err, 1e-12),
            Check::new("lame_modewise", lame_err, 1e-12),
            Check::new("coupled_group_law", group_err, 1e-12),
            Check::new("coupled_determinant", det_err, 1e-12),
            Check::new("smoothing_finite", smooth, f64::MAX),
        ],
        measured: vec![("smoothing_constant".into(), smooth)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_on_small_grids() {
        let g = PeriodicGrid::new(2, 32).unwrap();
        let lp = verify_lp(g, 5, 1);
        assert!(lp.passed(), "{lp:?}");
        let pp = verify_paraproduct(g, 4, 2).unwrap();
        assert!(pp.passed(), "{pp:?}");
        let sg = verify_semigroup(g, 3).unwrap();
        assert!(sg.passed(), "{sg:?}");
    }
}
