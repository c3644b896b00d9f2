//! Dyadic partition of unity, the block operators `Δ_j`, `S_j`, the sharp
//! Friedrichs truncation `J_n`, and Besov, Chemin-Lerner and hybrid norms.
//!
//! The radial cut-off is
//!
//! ```text
//! f(t) = exp(−1/t) for t > 0, 0 otherwise
//! g(t) = f(t) / (f(t) + f(1 − t))
//! χ(r) = 1 − g((r − 3/4) / (4/3 − 3/4))
//! φ(r) = χ(r/2) − χ(r)
//! ```
//!
//! and blocks act on the physical wavevector, `Δ_j = φ(2^{−j}D)`. The block
//! range contains every `j` whose ring meets the lattice, so the partition
//! telescopes to one on every nonzero lattice frequency. `S_j = χ(2^{−j}D)`
//! passes the mean; Besov sums exclude it and report it separately.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{self, Exponent, PeriodicGrid, SpectralField};

/// Inner radius of the ring `supp φ`.
pub const RING_INNER: f64 = 0.75;
/// Outer radius of the ring `supp φ`.
pub const RING_OUTER: f64 = 8.0 / 3.0;

fn smooth_step_base(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

fn smooth_step(t: f64) -> f64 {
    let a = smooth_step_base(t);
    let b = smooth_step_base(1.0 - t);
    a / (a + b)
}

/// Radial low-pass profile: one on `[0, 3/4]`, zero on `[4/3, ∞)`,
/// nonincreasing and `C^∞`.
pub fn chi(r: f64) -> f64 {
    1.0 - smooth_step((r - 0.75) / (4.0 / 3.0 - 0.75))
}

/// Ring profile `χ(r/2) − χ(r)`, supported in `[3/4, 8/3]`.
pub fn phi(r: f64) -> f64 {
    chi(0.5 * r) - chi(r)
}

/// Norm index `(s, p, r)` with an optional time exponent for Chemin-Lerner
/// norms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesovIndex {
    pub s: f64,
    pub p: Exponent,
    pub r: Exponent,
    pub rho: Option<Exponent>,
}

impl BesovIndex {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::usage("regularity index must be finite"));
        }
        Ok(BesovIndex {
            s,
            p: Exponent::new(p)?,
            r: Exponent::new(r)?,
            rho: None,
        })
    }

    pub fn with_time(mut self, rho: f64) -> Result<Self> {
        self.rho = Some(Exponent::new(rho)?);
        Ok(self)
    }

    /// `B^s_{2,1}`.
    pub fn l2_sum(s: f64) -> Self {
        BesovIndex {
            s,
            p: Exponent::Finite(2.0),
            r: Exponent::Finite(1.0),
            rho: None,
        }
    }

    /// `B^s_{2,2}`.
    pub fn l2_square(s: f64) -> Self {
        BesovIndex {
            r: Exponent::Finite(2.0),
            ..Self::l2_sum(s)
        }
    }

    /// `B^s_{2,∞}`.
    pub fn l2_sup(s: f64) -> Self {
        BesovIndex {
            r: Exponent::Infinite,
            ..Self::l2_sum(s)
        }
    }
}

/// Regularity `s_low` on blocks `j < threshold`, `s_high` on `j ≥ threshold`,
/// with `p = 2`, `r = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HybridIndex {
    pub s_low: f64,
    pub s_high: f64,
    pub threshold: i32,
}

/// Output of a block operator; `out_of_range` is set when `j` lies outside
/// the resolvable range and the field is identically zero.
#[derive(Clone, Debug)]
pub struct BlockPiece {
    pub field: SpectralField,
    pub out_of_range: bool,
}

/// Cut-off tables for one grid.
#[derive(Clone, Debug)]
pub struct DyadicPartition {
    grid: PeriodicGrid,
    j_min: i32,
    j_max: i32,
    /// Sparse `(index, φ(2^{−j}|ξ|))` per block, `j = j_min + position`.
    blocks: Vec<Vec<(usize, f64)>>,
}

pub fn make_partition(grid: &PeriodicGrid) -> DyadicPartition {
    DyadicPartition::new(grid)
}

impl DyadicPartition {
    pub fn new(grid: &PeriodicGrid) -> Self {
        let lo = (grid.min_wavenumber() / RING_OUTER).log2().floor() as i32 - 1;
        let hi = (grid.max_wavenumber() / RING_INNER).log2().ceil() as i32 + 1;
        let mut found: Vec<(i32, Vec<(usize, f64)>)> = Vec::new();
        for j in lo..=hi {
            let scale = 2f64.powi(-j);
            let entries: Vec<(usize, f64)> = (1..grid.len())
                .filter_map(|i| {
                    let w = phi(scale * grid.wavenumber(i));
                    (w != 0.0).then_some((i, w))
                })
                .collect();
            if !entries.is_empty() {
                found.push((j, entries));
            }
        }
        let j_min = found.first().map(|(j, _)| *j).unwrap_or(0);
        let j_max = found.last().map(|(j, _)| *j).unwrap_or(-1);
        let mut blocks = vec![Vec::new(); (j_max - j_min + 1).max(0) as usize];
        for (j, e) in found {
            blocks[(j - j_min) as usize] = e;
        }
        DyadicPartition {
            grid: *grid,
            j_min,
            j_max,
            blocks,
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn j_range(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn contains(&self, j: i32) -> bool {
        (self.j_min..=self.j_max).contains(&j)
    }

    /// Sparse weights of block `j`; empty outside the range.
    pub fn weights(&self, j: i32) -> &[(usize, f64)] {
        if self.contains(j) {
            &self.blocks[(j - self.j_min) as usize]
        } else {
            &[]
        }
    }

    /// Largest deviation of `Σ_j φ(2^{−j}ξ)` from one over nonzero lattice
    /// frequencies with `|ξ| ≤ radius`.
    pub fn partition_residual(&self, radius: f64) -> f64 {
        let mut sum = vec![0.0; self.grid.len()];
        for b in &self.blocks {
            for &(i, w) in b {
                sum[i] += w;
            }
        }
        (1..self.grid.len())
            .filter(|&i| self.grid.wavenumber(i) <= radius)
            .map(|i| (sum[i] - 1.0).abs())
            .fold(0.0, f64::max)
    }

    fn check_grid(&self, u: &SpectralField) {
        assert_eq!(u.grid(), &self.grid, "field and partition live on different grids");
    }

    /// Coefficients of `Δ_j u` as a dense field (zero when out of range).
    pub fn block_field(&self, u: &SpectralField, j: i32) -> SpectralField {
        self.check_grid(u);
        let mut out = SpectralField::zeros(self.grid, u.ncomp());
        for c in 0..u.ncomp() {
            let src = u.component(c);
            let dst = out.component_mut(c);
            for &(i, w) in self.weights(j) {
                dst[i] = src[i] * w;
            }
        }
        out
    }

    /// `Δ_j u`, flagged when `j` is not resolvable.
    pub fn block(&self, u: &SpectralField, j: i32) -> BlockPiece {
        let out_of_range = !self.contains(j);
        if out_of_range {
            log::warn!(
                "block {j} outside the resolvable range [{}, {}]",
                self.j_min,
                self.j_max
            );
        }
        BlockPiece {
            field: self.block_field(u, j),
            out_of_range,
        }
    }

    /// `S_j u = χ(2^{−j}D) u`, mean included.
    pub fn low_cutoff(&self, u: &SpectralField, j: i32) -> SpectralField {
        self.check_grid(u);
        let scale = 2f64.powi(-j);
        let grid = self.grid;
        let mut out = u.apply_symbol(|i| chi(scale * grid.wavenumber(i)));
        out.flag_mean_zero(u.is_mean_zero());
        out
    }

    /// `‖Δ_j u‖_{L^p}` for every `j` in range (Euclidean for vectors);
    /// `p = 2` by Parseval, other `p` by quadrature.
    pub fn block_norms(&self, u: &SpectralField, p: Exponent) -> Vec<f64> {
        self.check_grid(u);
        self.j_range().map(|j| self.block_lp(u, j, p)).collect()
    }

    fn block_lp(&self, u: &SpectralField, j: i32, p: Exponent) -> f64 {
        if p == Exponent::Finite(2.0) {
            let s: f64 = (0..u.ncomp())
                .map(|c| {
                    let src = u.component(c);
                    self.weights(j)
                        .iter()
                        .map(|&(i, w)| w * w * src[i].norm_sqr())
                        .sum::<f64>()
                })
                .sum();
            (s * self.grid.volume()).sqrt()
        } else {
            let b = self.block_field(u, j);
            spectral::lp_norm_physical(&self.grid, &b.to_physical(), p)
        }
    }

    /// Euclidean size of the mean, the scalar excluded from Besov sums.
    pub fn mean_magnitude(u: &SpectralField) -> f64 {
        (0..u.ncomp()).map(|c| u.mean(c).norm_sqr()).sum::<f64>().sqrt()
    }

    /// `ℓ^r_j (2^{js} b_j)` for a table of block norms indexed from `j_min`.
    pub fn weighted_sum(&self, norms: &[f64], s: f64, r: Exponent) -> f64 {
        r.sequence_norm(
            norms
                .iter()
                .enumerate()
                .map(|(k, b)| 2f64.powf((self.j_min + k as i32) as f64 * s) * b),
        )
    }

    pub fn besov_norm(&self, u: &SpectralField, idx: &BesovIndex) -> f64 {
        let norms = self.block_norms(u, idx.p);
        self.weighted_sum(&norms, idx.s, idx.r)
    }

    pub fn hybrid_norm(&self, u: &SpectralField, idx: &HybridIndex) -> f64 {
        let norms = self.block_norms(u, Exponent::Finite(2.0));
        norms
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let j = self.j_min + k as i32;
                let s = if j < idx.threshold { idx.s_low } else { idx.s_high };
                2f64.powf(j as f64 * s) * b
            })
            .sum()
    }

    /// Table `[sample][block]` of `‖Δ_j u(t)‖_{L^p}`.
    pub fn block_norm_table(&self, series: &FieldSeries, p: Exponent) -> Vec<Vec<f64>> {
        series.fields().iter().map(|f| self.block_norms(f, p)).collect()
    }

    /// `‖u‖_{L̃^ρ_T B^s_{p,r}}`: time norm per block first, then `ℓ^r`.
    pub fn chemin_lerner_norm(&self, series: &FieldSeries, idx: &BesovIndex) -> Result<f64> {
        let rho = Self::time_exponent(series, idx)?;
        let table = self.block_norm_table(series, idx.p);
        Ok(self.chemin_lerner_from_table(series, &table, idx.s, idx.r, rho))
    }

    /// `‖u‖_{L^ρ_T B^s_{p,r}}`: Besov norm per sample first, then time.
    pub fn lebesgue_besov_norm(&self, series: &FieldSeries, idx: &BesovIndex) -> Result<f64> {
        let rho = Self::time_exponent(series, idx)?;
        let table = self.block_norm_table(series, idx.p);
        let per_time: Vec<f64> = table.iter().map(|row| self.weighted_sum(row, idx.s, idx.r)).collect();
        Ok(series.time_norm(&per_time, rho))
    }

    fn time_exponent(series: &FieldSeries, idx: &BesovIndex) -> Result<Exponent> {
        if series.len() < 2 {
            return Err(Error::usage("time norms need at least two samples"));
        }
        idx.rho
            .ok_or_else(|| Error::usage("Chemin-Lerner norms need a time exponent"))
    }

    pub fn chemin_lerner_from_table(
        &self,
        series: &FieldSeries,
        table: &[Vec<f64>],
        s: f64,
        r: Exponent,
        rho: Exponent,
    ) -> f64 {
        let per_block: Vec<f64> = (0..self.block_count())
            .map(|k| {
                let col: Vec<f64> = table.iter().map(|row| row[k]).collect();
                series.time_norm(&col, rho)
            })
            .collect();
        self.weighted_sum(&per_block, s, r)
    }

    /// Smallest `C` for which the logarithmic interpolation inequality
    ///
    /// ```text
    /// ‖u‖_{L̃^ρ B^s_{2,1}} ≤ C (1+ε)/ε ‖u‖_{L̃^ρ B^s_{2,∞}}
    ///                        · log(e + (‖u‖_{L̃^ρ B^{s−ε}_{2,∞}} + ‖u‖_{L̃^ρ B^{s+ε}_{2,∞}}) / ‖u‖_{L̃^ρ B^s_{2,∞}})
    /// ```
    ///
    /// holds on this series. Zero series give zero.
    pub fn log_interpolation_check(&self, series: &FieldSeries, s: f64, eps: f64, rho: f64) -> Result<f64> {
        if !(eps > 0.0) {
            return Err(Error::usage("log interpolation needs ε > 0"));
        }
        let rho = Exponent::new(rho)?;
        if series.len() < 2 {
            return Err(Error::usage("time norms need at least two samples"));
        }
        let table = self.block_norm_table(series, Exponent::Finite(2.0));
        let cl = |s: f64, r: Exponent| self.chemin_lerner_from_table(series, &table, s, r, rho);
        let lhs = cl(s, Exponent::Finite(1.0));
        let mid = cl(s, Exponent::Infinite);
        if lhs == 0.0 || mid == 0.0 {
            return Ok(0.0);
        }
        let tails = cl(s - eps, Exponent::Infinite) + cl(s + eps, Exponent::Infinite);
        let rhs = (1.0 + eps) / eps * mid * (std::f64::consts::E + tails / mid).ln();
        Ok(lhs / rhs)
    }
}

/// Sharp truncation `J_n = 1_{1/n ≤ |ξ| ≤ n}(D)`; Nyquist lines are also
/// cleared so that truncated fields are exactly real.
pub fn friedrichs_truncate(u: &SpectralField, n: f64) -> SpectralField {
    let grid = *u.grid();
    let lo = 1.0 / n;
    let mut out = u.apply_symbol(|i| {
        let k = grid.wavenumber(i);
        if !grid.is_nyquist(i) && k >= lo && k <= n {
            1.0
        } else {
            0.0
        }
    });
    out.flag_mean_zero(true);
    out
}

/// In-place variant of [`friedrichs_truncate`] for a single component.
pub fn friedrichs_truncate_in_place(grid: &PeriodicGrid, comp: &mut [Complex64], n: f64) {
    let lo = 1.0 / n;
    for (i, x) in comp.iter_mut().enumerate() {
        let k = grid.wavenumber(i);
        if grid.is_nyquist(i) || k < lo || k > n {
            *x = Complex64::new(0.0, 0.0);
        }
    }
}

/// Time-stamped fields on one grid with trapezoidal quadrature weights.
#[derive(Clone, Debug)]
pub struct FieldSeries {
    times: Vec<f64>,
    fields: Vec<SpectralField>,
}

impl FieldSeries {
    pub fn new(times: Vec<f64>, fields: Vec<SpectralField>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::usage("empty series"));
        }
        if times.len() != fields.len() {
            return Err(Error::usage("time and field counts differ"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::usage("sample times must be strictly increasing"));
        }
        let (g, nc) = (*fields[0].grid(), fields[0].ncomp());
        if fields.iter().any(|f| *f.grid() != g || f.ncomp() != nc) {
            return Err(Error::usage("series fields must share grid and arity"));
        }
        Ok(FieldSeries { times, fields })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[SpectralField] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.fields[0].grid()
    }

    /// Trapezoidal weights on the sample times; all positive for two or
    /// more samples.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        trapezoid_weights(&self.times)
    }

    /// `L^ρ` norm in time of a nonnegative sampled function.
    pub fn time_norm(&self, values: &[f64], rho: Exponent) -> f64 {
        match rho {
            Exponent::Infinite => values.iter().cloned().fold(0.0, f64::max),
            Exponent::Finite(r) => {
                let w = self.trapezoid_weights();
                let s: f64 = w.iter().zip(values).map(|(w, v)| w * v.powf(r)).sum();
                s.powf(1.0 / r)
            }
        }
    }
}

pub fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut w = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let h = 0.5 * (times[k + 1] - times[k]);
        w[k] += h;
        w[k + 1] += h;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random_field, DiffOp};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(2, n).unwrap()
    }

    #[test]
    fn profile_supports() {
        assert_eq!(chi(0.0), 1.0);
        assert_eq!(chi(0.75), 1.0);
        assert_eq!(chi(4.0 / 3.0), 0.0);
        assert_eq!(phi(0.7), 0.0);
        assert_eq!(phi(8.0 / 3.0), 0.0);
        assert_eq!(phi(3.0), 0.0);
        for k in 0..200 {
            let r = k as f64 * 0.01;
            assert!(chi(r + 0.01) <= chi(r));
        }
    }

    #[test]
    fn partition_of_unity_on_lattice() {
        for n in [16, 32, 64, 128] {
            let g = grid(n);
            let p = make_partition(&g);
            assert!(p.partition_residual(g.max_wavenumber()) <= 1e-12, "n={n}");
        }
    }

    #[test]
    fn telescoping_low_cutoff() {
        let g = grid(32);
        let p = make_partition(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random_field(g, 1, &mut rng, |_| 1.0);
        for j in p.j_range() {
            let diff = p.low_cutoff(&u, j).sub(&p.low_cutoff(&u, j - 1)).unwrap();
            let blk = p.block_field(&u, j - 1);
            assert!(diff.sub(&blk).unwrap().max_abs_coefficient() < 1e-15);
        }
    }

    #[test]
    fn single_mode_hits_three_blocks() {
        let g = grid(64);
        let p = make_partition(&g);
        let j0 = 3;
        let mut u = SpectralField::zeros(g, 1);
        u.component_mut(0)[g.index_of([8, 0])] = Complex64::new(1.0, 0.0);
        for j in p.j_range() {
            let b = p.block_field(&u, j);
            let expect = phi(2f64.powi(-j) * 8.0);
            assert_eq!(b.component(0)[g.index_of([8, 0])].re, expect);
            if (j - j0).abs() > 1 {
                assert_eq!(b.max_abs_coefficient(), 0.0);
            }
        }
    }

    #[test]
    fn out_of_range_is_flagged_zero() {
        let g = grid(16);
        let p = make_partition(&g);
        let u = SpectralField::from_fn(g, 1, |x, _| x[0].cos());
        let piece = p.block(&u, p.j_max() + 3);
        assert!(piece.out_of_range);
        assert_eq!(piece.field.max_abs_coefficient(), 0.0);
        assert!(!p.block(&u, 0).out_of_range);
    }

    #[test]
    fn cosine_besov_norm_closed_form() {
        let g = grid(32);
        let p = make_partition(&g);
        let u = SpectralField::from_fn(g, 1, |x, _| x[0].cos());
        let l2 = std::f64::consts::PI * std::f64::consts::SQRT_2;
        for (s, r) in [(0.0, 1.0), (1.0, 2.0), (-0.5, 1.0), (0.3, f64::INFINITY)] {
            let idx = BesovIndex::new(s, 2.0, r).unwrap();
            let terms: Vec<f64> = (-1..=1)
                .map(|j: i32| 2f64.powf(j as f64 * s) * phi(2f64.powi(-j)) * l2)
                .collect();
            let want = Exponent::new(r).unwrap().sequence_norm(terms);
            let got = p.besov_norm(&u, &idx);
            assert!((got - want).abs() <= 1e-12 * want, "s={s} r={r}");
        }
    }

    #[test]
    fn friedrichs_is_projection() {
        let g = PeriodicGrid::with_periods(2, 32, &[3.0, 3.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random_field(g, 2, &mut rng, |_| 1.0);
        let once = friedrichs_truncate(&u, 10.0);
        let twice = friedrichs_truncate(&once, 10.0);
        assert_eq!(once, twice);
        for i in 0..g.len() {
            let k = g.wavenumber(i);
            if !(0.1..=10.0).contains(&k) {
                assert_eq!(once.component(0)[i], Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn hybrid_reduces_to_besov() {
        let g = grid(32);
        let p = make_partition(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let u = random_field(g, 1, &mut rng, |_| 1.0);
        let h = p.hybrid_norm(
            &u,
            &HybridIndex {
                s_low: 0.5,
                s_high: 0.5,
                threshold: 2,
            },
        );
        let b = p.besov_norm(&u, &BesovIndex::l2_sum(0.5));
        assert!((h - b).abs() <= 1e-13 * b);
        let mut low = SpectralField::zeros(g, 1);
        low.component_mut(0)[g.index_of([1, 0])] = Complex64::new(1.0, 0.0);
        let h1 = p.hybrid_norm(
            &low,
            &HybridIndex {
                s_low: 0.0,
                s_high: 7.0,
                threshold: 3,
            },
        );
        let b1 = p.besov_norm(&low, &BesovIndex::l2_sum(0.0));
        assert!((h1 - b1).abs() <= 1e-14 * b1);
    }

    #[test]
    fn constant_in_time_chemin_lerner() {
        let g = grid(16);
        let p = make_partition(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let u = random_field(g, 1, &mut rng, |_| 1.0);
        let series = FieldSeries::new(vec![0.0, 0.5, 1.0], vec![u.clone(), u.clone(), u.clone()]).unwrap();
        let idx = BesovIndex::l2_sum(0.5).with_time(f64::INFINITY).unwrap();
        let cl = p.chemin_lerner_norm(&series, &idx).unwrap();
        assert!((cl - p.besov_norm(&u, &idx)).abs() <= 1e-14 * cl);
        assert!(FieldSeries::new(vec![], vec![]).is_err());
        let short = FieldSeries::new(vec![0.0], vec![u]).unwrap();
        assert!(p.chemin_lerner_norm(&short, &idx).is_err());
    }

    #[test]
    fn log_interpolation_zero_series() {
        let g = grid(16);
        let p = make_partition(&g);
        let z = SpectralField::zeros(g, 1);
        let series = FieldSeries::new(vec![0.0, 1.0], vec![z.clone(), z]).unwrap();
        assert_eq!(p.log_interpolation_check(&series, 1.0, 0.5, 1.0).unwrap(), 0.0);
        assert!(p.log_interpolation_check(&series, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn blocks_commute_with_derivatives() {
        let g = grid(32);
        let p = make_partition(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let u = random_field(g, 1, &mut rng, |_| 1.0);
        let du = crate::spectral::differentiate(&u, DiffOp::Gradient).unwrap();
        for j in p.j_range() {
            let a = p.block_field(&du, j);
            let b = crate::spectral::differentiate(&p.block_field(&u, j), DiffOp::Gradient).unwrap();
            let scale = du.max_abs_coefficient();
            assert!(a.sub(&b).unwrap().max_abs_coefficient() <= 1e-15 * scale);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn embedding_chain(seed in any::<u64>()) {
            let g = grid(32);
            let p = make_partition(&g);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = random_field(g, 1, &mut rng, |k| 1.0 / (1.0 + k));
            let sup = p.besov_norm(&u, &BesovIndex::l2_sup(0.0));
            let sum = p.besov_norm(&u, &BesovIndex::l2_sum(0.0));
            let l2 = u.l2_norm();
            prop_assert!(sup <= l2 * (1.0 + 1e-12));
            prop_assert!(l2 <= sum * (1.0 + 1e-12));
        }

        #[test]
        fn sum_of_blocks_is_identity(seed in any::<u64>()) {
            let g = grid(32);
            let p = make_partition(&g);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = random_field(g, 2, &mut rng, |_| 1.0);
            let mut acc = SpectralField::zeros(g, 2);
            for j in p.j_range() {
                acc.axpy(1.0, &p.block_field(&u, j)).unwrap();
            }
            prop_assert!(acc.sub(&u).unwrap().max_abs_coefficient() < 1e-13);
        }
    }

    #[test]
    fn trapezoid_weights_sum_to_length() {
        let w = trapezoid_weights(&[0.0, 0.1, 0.3, 1.0]);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(w.iter().all(|x| *x > 0.0));
    }
}
