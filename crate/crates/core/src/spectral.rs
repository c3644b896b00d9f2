//! Periodic grids, discrete Fourier transforms, Fourier multipliers and
//! dealiased products.
//!
//! Normalization is fixed once for the whole crate: the forward transform
//! carries `1/N^d`, so the `k = 0` coefficient is the mean and
//!
//! ```text
//! u(x) = Σ_k û_k exp(i ξ_k · x),   ξ_k = 2π k / a   (per axis)
//! ```
//!
//! Parseval then reads `‖u‖²_{L²} = |T^d_a| Σ_k |û_k|²` with `|T^d_a| = ∏ a_i`,
//! which is also exactly what the rectangle rule gives in physical space.
//!
//! Fields are stored row-major with axis 0 (x₁) outermost. Odd-order
//! multipliers (gradient, divergence, curl) use a zero symbol on the Nyquist
//! line of the differentiated axis so that real fields stay real; even-order
//! symbols (Laplacian, Lamé) use the full wavevector.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Lebesgue or summation exponent in `[1, ∞]` with infinity spelled out.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            Ok(Exponent::Infinite)
        } else if p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::usage(format!("exponent {p} must lie in [1, ∞]")))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    /// `ℓ^p` norm of a finite nonnegative sequence.
    pub fn sequence_norm<I: IntoIterator<Item = f64>>(self, items: I) -> f64 {
        match self {
            Exponent::Infinite => items.into_iter().fold(0.0, f64::max),
            Exponent::Finite(p) if p == 1.0 => items.into_iter().sum(),
            Exponent::Finite(p) if p == 2.0 => items.into_iter().map(|x| x * x).sum::<f64>().sqrt(),
            Exponent::Finite(p) => items.into_iter().map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }
}

/// A periodic lattice with `n` points per axis on the box `∏ [0, a_i)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicGrid {
    dim: usize,
    n: usize,
    periods: [f64; 2],
}

impl PeriodicGrid {
    /// Grid with the default period `2π` on every axis.
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        Self::with_periods(dim, n, &vec![TWO_PI; dim.max(1)])
    }

    pub fn with_periods(dim: usize, n: usize, periods: &[f64]) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::usage(format!("dimension must be 1 or 2, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::usage(format!(
                "points per axis must be a power of two and at least 8, got {n}"
            )));
        }
        if periods.len() != dim {
            return Err(Error::usage(format!("expected {dim} periods, got {}", periods.len())));
        }
        if periods.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::usage("periods must be positive and finite"));
        }
        let mut p = [TWO_PI; 2];
        p[..dim].copy_from_slice(periods);
        Ok(PeriodicGrid { dim, n, periods: p })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self, axis: usize) -> f64 {
        self.periods[axis]
    }

    pub fn periods(&self) -> &[f64] {
        &self.periods[..self.dim]
    }

    /// Number of lattice points, `N^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Measure of the periodic box.
    pub fn volume(&self) -> f64 {
        self.periods().iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.len() as f64
    }

    /// One-dimensional grids are accepted but lie outside the `d ≥ 2` regime
    /// covered by the well-posedness theory; reports carry this flag.
    pub fn outside_theorem_hypotheses(&self) -> bool {
        self.dim < 2
    }

    fn signed(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    fn axis_indices(&self, flat: usize) -> [usize; 2] {
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat / self.n, flat % self.n]
        }
    }

    /// Integer wavenumber `k ∈ {−N/2+1, …, N/2}^d` of a flat index.
    pub fn mode(&self, flat: usize) -> [i64; 2] {
        let ax = self.axis_indices(flat);
        let mut k = [0i64; 2];
        for d in 0..self.dim {
            k[d] = self.signed(ax[d]);
        }
        k
    }

    /// Flat index of an integer wavenumber, wrapping modulo `N`.
    pub fn index_of(&self, k: [i64; 2]) -> usize {
        let n = self.n as i64;
        let w = |x: i64| x.rem_euclid(n) as usize;
        if self.dim == 1 {
            w(k[0])
        } else {
            w(k[0]) * self.n + w(k[1])
        }
    }

    /// Physical wavevector `ξ = 2π k / a`.
    pub fn wavevector(&self, flat: usize) -> [f64; 2] {
        let k = self.mode(flat);
        let mut xi = [0.0; 2];
        for d in 0..self.dim {
            xi[d] = TWO_PI * k[d] as f64 / self.periods[d];
        }
        xi
    }

    pub fn wavenumber(&self, flat: usize) -> f64 {
        let xi = self.wavevector(flat);
        (xi[0] * xi[0] + xi[1] * xi[1]).sqrt()
    }

    /// True when the index lies on the Nyquist line of `axis`.
    pub fn is_nyquist_on(&self, flat: usize, axis: usize) -> bool {
        self.axis_indices(flat)[axis] == self.n / 2
    }

    pub fn is_nyquist(&self, flat: usize) -> bool {
        (0..self.dim).any(|d| self.is_nyquist_on(flat, d))
    }

    /// Symbol of `∂/∂x_axis` divided by `i`, zero on that axis' Nyquist line.
    pub fn derivative_symbol(&self, flat: usize, axis: usize) -> f64 {
        if self.is_nyquist_on(flat, axis) {
            0.0
        } else {
            self.wavevector(flat)[axis]
        }
    }

    pub fn point(&self, flat: usize) -> [f64; 2] {
        let ax = self.axis_indices(flat);
        let mut x = [0.0; 2];
        for d in 0..self.dim {
            x[d] = ax[d] as f64 * self.periods[d] / self.n as f64;
        }
        x
    }

    /// Smallest nonzero lattice wavenumber.
    pub fn min_wavenumber(&self) -> f64 {
        self.periods().iter().map(|a| TWO_PI / a).fold(f64::INFINITY, f64::min)
    }

    /// Largest lattice wavenumber (the Nyquist corner).
    pub fn max_wavenumber(&self) -> f64 {
        self.periods()
            .iter()
            .map(|a| {
                let x = TWO_PI / a * (self.n / 2) as f64;
                x * x
            })
            .sum::<f64>()
            .sqrt()
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

fn transpose_square(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Unnormalized in-place d-dimensional FFT on a square array of side `side`.
fn fft_in_place(data: &mut [Complex64], side: usize, dim: usize, inverse: bool) {
    let fft = plan(side, inverse);
    fft.process(data);
    if dim == 2 {
        transpose_square(data, side);
        fft.process(data);
        transpose_square(data, side);
    }
}

/// Forward transform of one real component.
pub fn transform(grid: &PeriodicGrid, values: &[f64]) -> Result<Vec<Complex64>> {
    if values.len() != grid.len() {
        return Err(Error::usage(format!(
            "sample count {} does not match grid size {}",
            values.len(),
            grid.len()
        )));
    }
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_in_place(&mut buf, grid.n(), grid.dim(), false);
    let scale = 1.0 / grid.len() as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    Ok(buf)
}

/// Inverse transform of one component, keeping the complex values.
pub fn inverse_complex(grid: &PeriodicGrid, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    if coeffs.len() != grid.len() {
        return Err(Error::usage(format!(
            "coefficient count {} does not match grid size {}",
            coeffs.len(),
            grid.len()
        )));
    }
    let mut buf = coeffs.to_vec();
    fft_in_place(&mut buf, grid.n(), grid.dim(), true);
    Ok(buf)
}

/// Inverse transform of one component, returning the real part.
pub fn inverse(grid: &PeriodicGrid, coeffs: &[Complex64]) -> Result<Vec<f64>> {
    Ok(inverse_complex(grid, coeffs)?.into_iter().map(|c| c.re).collect())
}

/// Complex Fourier coefficients of a scalar or vector field.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: PeriodicGrid,
    comps: Vec<Vec<Complex64>>,
    mean_zero: bool,
}

impl SpectralField {
    pub fn zeros(grid: PeriodicGrid, ncomp: usize) -> Self {
        SpectralField {
            grid,
            comps: vec![vec![ZERO; grid.len()]; ncomp],
            mean_zero: true,
        }
    }

    pub fn from_components(grid: PeriodicGrid, comps: Vec<Vec<Complex64>>) -> Result<Self> {
        if comps.is_empty() {
            return Err(Error::usage("a field needs at least one component"));
        }
        if comps.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::usage("component length does not match grid"));
        }
        Ok(SpectralField {
            grid,
            comps,
            mean_zero: false,
        })
    }

    /// Forward transform of physical samples, one `Vec` per component.
    pub fn from_physical(grid: PeriodicGrid, values: &[Vec<f64>]) -> Result<Self> {
        let comps = values.iter().map(|v| transform(&grid, v)).collect::<Result<Vec<_>>>()?;
        Self::from_components(grid, comps)
    }

    /// Samples `f(x, component)` on the grid and transforms.
    pub fn from_fn(grid: PeriodicGrid, ncomp: usize, f: impl Fn([f64; 2], usize) -> f64) -> Self {
        let values: Vec<Vec<f64>> = (0..ncomp)
            .map(|c| (0..grid.len()).map(|i| f(grid.point(i), c)).collect())
            .collect();
        Self::from_physical(grid, &values).expect("sample count matches grid by construction")
    }

    pub fn to_physical(&self) -> Vec<Vec<f64>> {
        self.comps
            .iter()
            .map(|c| inverse(&self.grid, c).expect("field length matches grid"))
            .collect()
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.comps.len()
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.comps[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.comps[c]
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.comps
    }

    pub fn into_components(self) -> Vec<Vec<Complex64>> {
        self.comps
    }

    /// Single-component view of component `c`.
    pub fn extract(&self, c: usize) -> SpectralField {
        SpectralField {
            grid: self.grid,
            comps: vec![self.comps[c].clone()],
            mean_zero: self.mean_zero,
        }
    }

    pub fn is_mean_zero(&self) -> bool {
        self.mean_zero
    }

    /// Sets the `k = 0` coefficient of every component to exactly zero and
    /// flags the field as an element of the homogeneous class.
    pub fn with_mean_zero(mut self) -> Self {
        self.make_mean_zero();
        self
    }

    pub fn make_mean_zero(&mut self) {
        for c in &mut self.comps {
            c[0] = ZERO;
        }
        self.mean_zero = true;
    }

    /// Clears the flag without touching coefficients.
    pub fn flag_mean_zero(&mut self, flag: bool) {
        self.mean_zero = flag;
    }

    pub fn mean(&self, c: usize) -> Complex64 {
        self.comps[c][0]
    }

    fn check_same(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::usage("fields live on different grids"));
        }
        if self.ncomp() != other.ncomp() {
            return Err(Error::usage(format!(
                "component count mismatch: {} vs {}",
                self.ncomp(),
                other.ncomp()
            )));
        }
        Ok(())
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &SpectralField) -> Result<()> {
        self.check_same(other)?;
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y * alpha;
            }
        }
        self.mean_zero &= other.mean_zero;
        Ok(())
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    pub fn scaled(&self, alpha: f64) -> SpectralField {
        let mut out = self.clone();
        out.scale(alpha);
        out
    }

    pub fn scale(&mut self, alpha: f64) {
        for c in &mut self.comps {
            c.iter_mut().for_each(|x| *x *= alpha);
        }
    }

    /// Multiplies every coefficient by a real symbol depending only on the
    /// lattice index.
    pub fn apply_symbol(&self, symbol: impl Fn(usize) -> f64) -> SpectralField {
        let mut out = self.clone();
        for c in &mut out.comps {
            for (i, x) in c.iter_mut().enumerate() {
                *x *= symbol(i);
            }
        }
        out
    }

    /// `L²` norm over the torus via Parseval (Euclidean norm for vectors).
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.comps.iter().flat_map(|c| c.iter()).map(|x| x.norm_sqr()).sum();
        (s * self.grid.volume()).sqrt()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|x| x.norm())
            .fold(0.0, f64::max)
    }

    /// Largest `|û(k) − conj(û(−k))|` relative to the largest coefficient.
    /// Nyquist lines are excluded: they alias onto themselves.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs_coefficient();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for c in &self.comps {
            for i in 0..self.grid.len() {
                if self.grid.is_nyquist(i) {
                    continue;
                }
                let k = self.grid.mode(i);
                let j = self.grid.index_of([-k[0], -k[1]]);
                worst = worst.max((c[i] - c[j].conj()).norm());
            }
        }
        worst / scale
    }

    /// Sets every coefficient on a Nyquist line to zero.
    pub fn clear_nyquist(&mut self) {
        let grid = self.grid;
        for c in &mut self.comps {
            for (i, x) in c.iter_mut().enumerate() {
                if grid.is_nyquist(i) {
                    *x = ZERO;
                }
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .all(|x| x.re.is_finite() && x.im.is_finite())
    }

    /// Largest pointwise magnitude in physical space (Euclidean for vectors).
    pub fn sup_norm(&self) -> f64 {
        sup_norm_physical(&self.to_physical())
    }

    /// Minimum over the grid of one component's physical values.
    pub fn physical_min(&self, c: usize) -> f64 {
        inverse(&self.grid, &self.comps[c])
            .expect("field length matches grid")
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Largest pointwise Euclidean magnitude of a multi-component sample set.
pub fn sup_norm_physical(values: &[Vec<f64>]) -> f64 {
    let n = values.first().map_or(0, |v| v.len());
    (0..n)
        .map(|i| values.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// `L^p` norm by rectangle-rule quadrature of the pointwise Euclidean
/// magnitude.
pub fn lp_norm_physical(grid: &PeriodicGrid, values: &[Vec<f64>], p: Exponent) -> f64 {
    match p {
        Exponent::Infinite => sup_norm_physical(values),
        Exponent::Finite(p) => {
            let n = grid.len();
            let s: f64 = (0..n)
                .map(|i| {
                    let m2: f64 = values.iter().map(|c| c[i] * c[i]).sum();
                    if p == 2.0 {
                        m2
                    } else {
                        m2.sqrt().powf(p)
                    }
                })
                .sum();
            (s * grid.cell_volume()).powf(1.0 / p)
        }
    }
}

/// Differential operators realized as Fourier multipliers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiffOp {
    /// `i ξ ⊗ û`. A scalar maps to a `d`-vector; a `d`-vector maps to the
    /// `d×d` tensor with component `i·d + k` holding `∂_k u_i`.
    Gradient,
    /// `i ξ · û`.
    Divergence,
    /// Scalar vorticity `∂₁u₂ − ∂₂u₁` (two dimensions only).
    Curl,
    /// `𝒜 = Δ + ∇div`, symbol `û ↦ −|ξ|² û − ξ (ξ·û)`.
    Lame,
}

/// `∂_axis` of one component.
pub fn partial(grid: &PeriodicGrid, comp: &[Complex64], axis: usize) -> Vec<Complex64> {
    comp.iter()
        .enumerate()
        .map(|(i, x)| x * Complex64::new(0.0, grid.derivative_symbol(i, axis)))
        .collect()
}

pub fn differentiate(u: &SpectralField, op: DiffOp) -> Result<SpectralField> {
    let grid = *u.grid();
    let d = grid.dim();
    let comps = match op {
        DiffOp::Gradient => {
            let mut out = Vec::with_capacity(u.ncomp() * d);
            for c in u.components() {
                for axis in 0..d {
                    out.push(partial(&grid, c, axis));
                }
            }
            out
        }
        DiffOp::Divergence => {
            if u.ncomp() != d {
                return Err(Error::usage(format!(
                    "divergence needs a {d}-vector, got {} components",
                    u.ncomp()
                )));
            }
            let mut acc = vec![ZERO; grid.len()];
            for (axis, c) in u.components().iter().enumerate() {
                for (a, x) in acc.iter_mut().zip(partial(&grid, c, axis)) {
                    *a += x;
                }
            }
            vec![acc]
        }
        DiffOp::Curl => {
            if d != 2 || u.ncomp() != 2 {
                return Err(Error::usage("curl needs a 2-vector on a two-dimensional grid"));
            }
            let a = partial(&grid, u.component(1), 0);
            let b = partial(&grid, u.component(0), 1);
            vec![a.iter().zip(&b).map(|(x, y)| x - y).collect()]
        }
        DiffOp::Lame => {
            if u.ncomp() != d {
                return Err(Error::usage(format!(
                    "the Lamé operator needs a {d}-vector, got {} components",
                    u.ncomp()
                )));
            }
            let mut out = vec![vec![ZERO; grid.len()]; d];
            for i in 0..grid.len() {
                let xi = grid.wavevector(i);
                let k2 = xi[0] * xi[0] + xi[1] * xi[1];
                let mut dot = ZERO;
                for c in 0..d {
                    dot += u.component(c)[i] * xi[c];
                }
                for c in 0..d {
                    out[c][i] = -u.component(c)[i] * k2 - dot * xi[c];
                }
            }
            out
        }
    };
    let mut f = SpectralField::from_components(grid, comps)?;
    // All of these annihilate constants.
    f.make_mean_zero();
    Ok(f)
}

/// Helmholtz split `u = P u + (I − P) u` with `P = ξξᵀ/|ξ|²` the projection
/// on potential (compressible) fields. Returns `(potential, solenoidal)`;
/// the mean is assigned to the solenoidal part.
pub fn helmholtz_split(u: &SpectralField) -> Result<(SpectralField, SpectralField)> {
    let grid = *u.grid();
    let d = grid.dim();
    if u.ncomp() != d {
        return Err(Error::usage("Helmholtz split needs a d-vector"));
    }
    let mut pot = SpectralField::zeros(grid, d);
    pot.flag_mean_zero(true);
    let mut sol = u.clone();
    for i in 0..grid.len() {
        let xi = grid.wavevector(i);
        let k2 = xi[0] * xi[0] + xi[1] * xi[1];
        if k2 == 0.0 {
            continue;
        }
        let mut dot = ZERO;
        for c in 0..d {
            dot += u.component(c)[i] * xi[c];
        }
        for c in 0..d {
            let p = dot * (xi[c] / k2);
            pot.component_mut(c)[i] = p;
            sol.component_mut(c)[i] -= p;
        }
    }
    Ok((pot, sol))
}

/// A zero-padded physical grid of side `m ≥ n` used to evaluate products and
/// compositions without aliasing back into the retained modes.
#[derive(Clone, Debug)]
pub struct PaddedGrid {
    grid: PeriodicGrid,
    m: usize,
    map: Vec<Option<usize>>,
}

impl PaddedGrid {
    /// Side `3N/2`: products of two fields supported in `|k_i| < N/2` are
    /// exact on every retained mode.
    pub fn three_halves(grid: &PeriodicGrid) -> Self {
        Self::with_side(grid, 3 * grid.n() / 2)
    }

    /// Side `2N`, used for non-polynomial compositions.
    pub fn double(grid: &PeriodicGrid) -> Self {
        Self::with_side(grid, 2 * grid.n())
    }

    pub fn with_side(grid: &PeriodicGrid, m: usize) -> Self {
        assert!(m >= grid.n() && m.is_multiple_of(2), "padded side must be even and ≥ N");
        let mw = m as i64;
        let map = (0..grid.len())
            .map(|i| {
                if grid.is_nyquist(i) {
                    return None;
                }
                let k = grid.mode(i);
                let w = |x: i64| x.rem_euclid(mw) as usize;
                Some(if grid.dim() == 1 {
                    w(k[0])
                } else {
                    w(k[0]) * m + w(k[1])
                })
            })
            .collect();
        PaddedGrid { grid: *grid, m, map }
    }

    pub fn side(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.m.pow(self.grid.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Physical values of one component on the padded grid.
    pub fn to_physical(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = vec![ZERO; self.len()];
        for (i, slot) in self.map.iter().enumerate() {
            if let Some(j) = slot {
                buf[*j] = coeffs[i];
            }
        }
        fft_in_place(&mut buf, self.m, self.grid.dim(), true);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Forward transform of padded physical values, truncated back to the
    /// native lattice (Nyquist lines zero).
    pub fn from_physical(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_in_place(&mut buf, self.m, self.grid.dim(), false);
        let scale = 1.0 / self.len() as f64;
        self.map
            .iter()
            .map(|slot| slot.map_or(ZERO, |j| buf[j] * scale))
            .collect()
    }
}

/// Pointwise product with `3/2` zero padding. A scalar broadcasts against a
/// vector; two vectors of equal arity multiply componentwise.
pub fn dealiased_product(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    if u.grid() != v.grid() {
        return Err(Error::usage("product of fields on different grids"));
    }
    let (nu, nv) = (u.ncomp(), v.ncomp());
    if !(nu == nv || nu == 1 || nv == 1) {
        return Err(Error::usage(format!(
            "cannot multiply {nu}-component and {nv}-component fields"
        )));
    }
    let pad = PaddedGrid::three_halves(u.grid());
    let pu: Vec<Vec<f64>> = u.components().iter().map(|c| pad.to_physical(c)).collect();
    let pv: Vec<Vec<f64>> = v.components().iter().map(|c| pad.to_physical(c)).collect();
    let n = nu.max(nv);
    let comps = (0..n)
        .map(|c| {
            let a = &pu[if nu == 1 { 0 } else { c }];
            let b = &pv[if nv == 1 { 0 } else { c }];
            let prod: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
            pad.from_physical(&prod)
        })
        .collect();
    SpectralField::from_components(*u.grid(), comps)
}

/// Random real field with Gaussian coefficients of standard deviation
/// `envelope(|ξ|)`, mean zero, Nyquist lines zero, Hermitian by construction.
pub fn random_field<R: Rng + ?Sized>(
    grid: PeriodicGrid,
    ncomp: usize,
    rng: &mut R,
    envelope: impl Fn(f64) -> f64,
) -> SpectralField {
    let mut comps = Vec::with_capacity(ncomp);
    for _ in 0..ncomp {
        let raw: Vec<Complex64> = (0..grid.len())
            .map(|i| {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                if i == 0 || grid.is_nyquist(i) {
                    ZERO
                } else {
                    Complex64::new(a, b) * envelope(grid.wavenumber(i))
                }
            })
            .collect();
        let sym: Vec<Complex64> = (0..grid.len())
            .map(|i| {
                let k = grid.mode(i);
                let j = grid.index_of([-k[0], -k[1]]);
                (raw[i] + raw[j].conj()) * 0.5
            })
            .collect();
        comps.push(sym);
    }
    let mut f = SpectralField::from_components(grid, comps).expect("lengths match by construction");
    f.make_mean_zero();
    f
}
