//! Bony decomposition, composition operators and empirical constants for
//! the paraproduct, remainder and composition estimates.
//!
//! With `S_{j−1} = Σ_{k ≤ j−2} Δ_k + mean`,
//!
//! ```text
//! T_u v = Σ_j S_{j−1}u Δ_j v,   R(u, v) = Σ_j Σ_{|j'−j| ≤ 1} Δ_j u Δ_{j'} v
//! ```
//!
//! and `uv = T_u v + T_v u + R(u, v) + ū v̄` where `ū v̄` is the product of
//! the means. The last term vanishes on the homogeneous class and is kept
//! separately so the split is exact for every pair.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::friedrichs::PressureLaw;
use crate::littlewood_paley::{BesovIndex, DyadicPartition};
use crate::spectral::{self, Exponent, PaddedGrid, PeriodicGrid, SpectralField};

/// Hard floor below which `1 + u` counts as vacuum.
pub const VACUUM_FLOOR: f64 = 1e-6;

/// The four parts of a Bony split.
#[derive(Clone, Debug)]
pub struct BonySplit {
    pub t_uv: SpectralField,
    pub t_vu: SpectralField,
    pub remainder: SpectralField,
    pub mean_term: SpectralField,
    /// Both inputs carried the mean-zero flag.
    pub mean_zero_inputs: bool,
}

impl BonySplit {
    pub fn total(&self) -> SpectralField {
        let mut s = self.t_uv.clone();
        s.axpy(1.0, &self.t_vu).expect("parts share shape");
        s.axpy(1.0, &self.remainder).expect("parts share shape");
        s.axpy(1.0, &self.mean_term).expect("parts share shape");
        s
    }
}

fn pair_arity(u: &SpectralField, v: &SpectralField) -> Result<usize> {
    if u.grid() != v.grid() {
        return Err(Error::usage("fields live on different grids"));
    }
    let (a, b) = (u.ncomp(), v.ncomp());
    if a == b || a == 1 || b == 1 {
        Ok(a.max(b))
    } else {
        Err(Error::usage(format!("cannot pair {a}- and {b}-component fields")))
    }
}

/// Padded physical values of every block of one component, plus the mean.
fn padded_blocks(part: &DyadicPartition, pad: &PaddedGrid, comp: &[Complex64]) -> (Vec<Vec<f64>>, f64) {
    let grid = part.grid();
    let blocks = part
        .j_range()
        .map(|j| {
            let mut c = vec![Complex64::new(0.0, 0.0); grid.len()];
            for &(i, w) in part.weights(j) {
                c[i] = comp[i] * w;
            }
            pad.to_physical(&c)
        })
        .collect();
    (blocks, comp[0].re)
}

pub fn bony_split(part: &DyadicPartition, u: &SpectralField, v: &SpectralField) -> Result<BonySplit> {
    let ncomp = pair_arity(u, v)?;
    if u.grid() != part.grid() {
        return Err(Error::usage("partition and fields live on different grids"));
    }
    let grid = *u.grid();
    let pad = PaddedGrid::three_halves(&grid);
    let nb = part.block_count();
    let mut parts: [Vec<Vec<Complex64>>; 4] = Default::default();
    for c in 0..ncomp {
        let (bu, mu) = padded_blocks(part, &pad, u.component(if u.ncomp() == 1 { 0 } else { c }));
        let (bv, mv) = padded_blocks(part, &pad, v.component(if v.ncomp() == 1 { 0 } else { c }));
        let len = pad.len();
        let mut t_uv = vec![0.0; len];
        let mut t_vu = vec![0.0; len];
        let mut rem = vec![0.0; len];
        let mut low_u = vec![mu; len];
        let mut low_v = vec![mv; len];
        for j in 0..nb {
            // low_* holds S_{j−1}: the mean plus blocks up to j − 2.
            if j >= 2 {
                for (l, b) in low_u.iter_mut().zip(&bu[j - 2]) {
                    *l += b;
                }
                for (l, b) in low_v.iter_mut().zip(&bv[j - 2]) {
                    *l += b;
                }
            }
            for x in 0..len {
                t_uv[x] += low_u[x] * bv[j][x];
                t_vu[x] += low_v[x] * bu[j][x];
                let mut near = bv[j][x];
                if j > 0 {
                    near += bv[j - 1][x];
                }
                if j + 1 < nb {
                    near += bv[j + 1][x];
                }
                rem[x] += bu[j][x] * near;
            }
        }
        parts[0].push(pad.from_physical(&t_uv));
        parts[1].push(pad.from_physical(&t_vu));
        parts[2].push(pad.from_physical(&rem));
        let mut mean = vec![Complex64::new(0.0, 0.0); grid.len()];
        mean[0] =
            u.component(if u.ncomp() == 1 { 0 } else { c })[0] * v.component(if v.ncomp() == 1 { 0 } else { c })[0];
        parts[3].push(mean);
    }
    let [a, b, r, m] = parts;
    Ok(BonySplit {
        t_uv: SpectralField::from_components(grid, a)?,
        t_vu: SpectralField::from_components(grid, b)?,
        remainder: SpectralField::from_components(grid, r)?,
        mean_term: SpectralField::from_components(grid, m)?,
        mean_zero_inputs: u.is_mean_zero() && v.is_mean_zero(),
    })
}

/// Product laws whose constants are measured.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProductLaw {
    /// `‖T_u v‖_{B^s_{2,1}} ≤ C ‖u‖_{L^∞} ‖v‖_{B^s_{2,1}}`.
    ParaproductSup { s: f64 },
    /// `‖T_u v‖_{B^{s+t}_{2,1}} ≤ C ‖u‖_{B^t_{∞,∞}} ‖v‖_{B^s_{2,1}}`, `t < 0`.
    ParaproductNegative { s: f64, t: f64 },
    /// `‖R(u,v)‖_{B^{s₁+s₂−d/2}_{2,1}} ≤ C ‖u‖_{B^{s₁}_{2,1}} ‖v‖_{B^{s₂}_{2,∞}}`, `s₁ + s₂ > 0`.
    Remainder { s1: f64, s2: f64 },
}

impl ProductLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ProductLaw::ParaproductNegative { t, .. } if !(t < 0.0) => Err(Error::usage(format!(
                "paraproduct law with negative index requires t < 0, got t = {t}"
            ))),
            ProductLaw::Remainder { s1, s2 } if !(s1 + s2 > 0.0) => Err(Error::usage(format!(
                "remainder law requires s1 + s2 > 0, got {}",
                s1 + s2
            ))),
            _ => Ok(()),
        }
    }

    /// Left side over right side for one pair; `0` when the right side is zero.
    pub fn ratio(&self, part: &DyadicPartition, u: &SpectralField, v: &SpectralField) -> Result<f64> {
        self.validate()?;
        let split = bony_split(part, u, v)?;
        let d = part.grid().dim() as f64;
        let (lhs, rhs) = match *self {
            ProductLaw::ParaproductSup { s } => (
                part.besov_norm(&split.t_uv, &BesovIndex::l2_sum(s)),
                u.sup_norm() * part.besov_norm(v, &BesovIndex::l2_sum(s)),
            ),
            ProductLaw::ParaproductNegative { s, t } => {
                let sup = BesovIndex {
                    s: t,
                    p: Exponent::Infinite,
                    r: Exponent::Infinite,
                    rho: None,
                };
                (
                    part.besov_norm(&split.t_uv, &BesovIndex::l2_sum(s + t)),
                    part.besov_norm(u, &sup) * part.besov_norm(v, &BesovIndex::l2_sum(s)),
                )
            }
            ProductLaw::Remainder { s1, s2 } => (
                part.besov_norm(&split.remainder, &BesovIndex::l2_sum(s1 + s2 - d / 2.0)),
                part.besov_norm(u, &BesovIndex::l2_sum(s1)) * part.besov_norm(v, &BesovIndex::l2_sup(s2)),
            ),
        };
        Ok(if rhs == 0.0 { 0.0 } else { lhs / rhs })
    }
}

/// Maximum ratio of a product law over explicit pairs.
pub fn measure_product_estimates(
    part: &DyadicPartition,
    pairs: &[(SpectralField, SpectralField)],
    law: ProductLaw,
) -> Result<f64> {
    law.validate()?;
    let mut worst = 0.0f64;
    for (u, v) in pairs {
        worst = worst.max(law.ratio(part, u, v)?);
    }
    Ok(worst)
}

/// Random mean-zero pairs with an algebraically decaying spectrum.
pub fn random_pairs(grid: PeriodicGrid, count: usize, seed: u64) -> Vec<(SpectralField, SpectralField)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u = spectral::random_field(grid, 1, &mut rng, |k| 1.0 / (1.0 + k * k));
            let v = spectral::random_field(grid, 1, &mut rng, |k| 1.0 / (1.0 + k * k));
            (u, v)
        })
        .collect()
}

/// Scalar maps with `F(0) = 0` applied pointwise.
#[derive(Clone, Copy, Debug)]
pub enum ScalarMap {
    Identity,
    /// `ln(1 + u)`.
    LogOnePlus,
    /// `G(1 + u) − G(1)` for a pressure law.
    PressurePotential(PressureLaw),
    Custom(fn(f64) -> f64),
}

impl ScalarMap {
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            ScalarMap::Identity => x,
            ScalarMap::LogOnePlus => x.ln_1p(),
            ScalarMap::PressurePotential(law) => law.potential(1.0 + x),
            ScalarMap::Custom(f) => f(x),
        }
    }

    fn singular_at_vacuum(&self) -> bool {
        matches!(self, ScalarMap::LogOnePlus | ScalarMap::PressurePotential(_))
    }
}

/// `F(u)` on a `2N` padded grid.
pub fn compose(u: &SpectralField, f: ScalarMap) -> Result<SpectralField> {
    compose_padded(u, f, &PaddedGrid::double(u.grid()))
}

/// `F(u)` on an explicit padded grid; used to measure residual aliasing.
pub fn compose_padded(u: &SpectralField, f: ScalarMap, pad: &PaddedGrid) -> Result<SpectralField> {
    if u.ncomp() != 1 {
        return Err(Error::usage("composition acts on scalar fields"));
    }
    let vals = pad.to_physical(u.component(0));
    if f.singular_at_vacuum() {
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(1.0 + min > VACUUM_FLOOR) {
            return Err(Error::Vacuum {
                min_density: 1.0 + min,
                floor: VACUUM_FLOOR,
            });
        }
    }
    let out: Vec<f64> = vals.into_iter().map(|x| f.apply(x)).collect();
    SpectralField::from_components(*u.grid(), vec![pad.from_physical(&out)])
}

/// `‖F(u)‖_{B^s_{2,1}} / ‖u‖_{B^s_{2,1}}`. The mean of `F(u)` is excluded
/// like every other Besov sum.
pub fn measure_composition_estimate(part: &DyadicPartition, u: &SpectralField, f: ScalarMap, s: f64) -> Result<f64> {
    let fu = compose(u, f)?;
    let idx = BesovIndex::l2_sum(s);
    let den = part.besov_norm(u, &idx);
    Ok(if den == 0.0 {
        0.0
    } else {
        part.besov_norm(&fu, &idx) / den
    })
}

/// `‖G(1+q₁) − G(1+q₂)‖_{B^s_{2,1}} / ‖q₁ − q₂‖_{B^s_{2,1}}`.
pub fn measure_difference_estimate(
    part: &DyadicPartition,
    q1: &SpectralField,
    q2: &SpectralField,
    law: PressureLaw,
    s: f64,
) -> Result<f64> {
    let g1 = compose(q1, ScalarMap::PressurePotential(law))?;
    let g2 = compose(q2, ScalarMap::PressurePotential(law))?;
    let idx = BesovIndex::l2_sum(s);
    let den = part.besov_norm(&q1.sub(q2)?, &idx);
    Ok(if den == 0.0 {
        0.0
    } else {
        part.besov_norm(&g1.sub(&g2)?, &idx) / den
    })
}
