//! Initial-data families.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::ledger::{hypothesis_norms, HypothesisNorms};
use crate::error::{Error, Result};
use crate::littlewood_paley::{BesovIndex, DyadicPartition};
use crate::paraproduct::VACUUM_FLOOR;
use crate::spectral::{random_field, SpectralField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    /// `q₀ = a_q cos x₁ cos x₂`, `u₀ = a_s (sin x₂, sin x₁) + a_c (sin x₁, sin x₂)`;
    /// in one dimension `q₀ = a_q cos x₁`, `u₀ = a_c sin x₁`.
    Trig { a_q: f64, a_s: f64, a_c: f64 },
    /// Random data on the shells `2^j ≤ |ξ| < 2^{j+1}`, `j_lo ≤ j ≤ j_hi`,
    /// clipped at `|ξ| ≤ k_max`, with shell amplitudes `2^{−js} decay^{j−j_lo}`
    /// and then rescaled to the target norms `‖q₀‖_{B^{d/2}_{2,1}}` and
    /// `‖u₀‖_{B^{d/2−1}_{2,2}}`.
    Multiscale {
        q_target: f64,
        u_target: f64,
        #[serde(default = "default_decay")]
        decay: f64,
        #[serde(default)]
        j_lo: i32,
        j_hi: i32,
        k_max: f64,
        #[serde(default)]
        seed: u64,
    },
    /// `q₀ = (ρ_min − 1) cos x₁ cos x₂` with `u₀ = a_u (sin x₂, sin x₁)`.
    NearVacuum { rho_min: f64, a_u: f64 },
}

fn default_decay() -> f64 {
    0.5
}

#[derive(Clone, Debug)]
pub struct InitialDatum {
    pub q0: SpectralField,
    pub u0: SpectralField,
    pub norms: HypothesisNorms,
    /// Set for near-vacuum data and for one-dimensional grids.
    pub outside_hypotheses: bool,
}

impl InitialData {
    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match *self {
            InitialData::Trig { a_q, a_s, a_c } => {
                if !finite(&[a_q, a_s, a_c]) {
                    return Err(Error::usage("trigonometric amplitudes must be finite"));
                }
            }
            InitialData::Multiscale {
                q_target,
                u_target,
                decay,
                j_lo,
                j_hi,
                k_max,
                ..
            } => {
                if !(q_target >= 0.0 && u_target >= 0.0 && finite(&[q_target, u_target])) {
                    return Err(Error::usage("target norms must be finite and nonnegative"));
                }
                if !(decay > 0.0 && decay.is_finite()) {
                    return Err(Error::usage("shell decay must be positive"));
                }
                if j_lo < 0 || j_hi < j_lo {
                    return Err(Error::usage(format!("shell range {j_lo}..={j_hi} is empty")));
                }
                if !(k_max >= 1.0) {
                    return Err(Error::usage("k_max must be at least 1"));
                }
            }
            InitialData::NearVacuum { rho_min, a_u } => {
                if !(rho_min > 0.0 && rho_min < 1.0 && a_u.is_finite()) {
                    return Err(Error::usage("near-vacuum data needs 0 < rho_min < 1"));
                }
            }
        }
        Ok(())
    }

    pub fn generate(&self, part: &DyadicPartition) -> Result<InitialDatum> {
        self.validate()?;
        let g = *part.grid();
        let d = g.dim();
        let (q0, u0, flagged) =
            match *self {
                InitialData::Trig { a_q, a_s, a_c } => {
                    let q = SpectralField::from_fn(g, 1, |x, _| {
                        if d == 1 {
                            a_q * x[0].cos()
                        } else {
                            a_q * x[0].cos() * x[1].cos()
                        }
                    });
                    let u = SpectralField::from_fn(g, d, |x, c| {
                        if d == 1 {
                            a_c * x[0].sin()
                        } else {
                            a_s * x[1 - c].sin() + a_c * x[c].sin()
                        }
                    });
                    (q, u, false)
                }
                InitialData::Multiscale {
                    q_target,
                    u_target,
                    decay,
                    j_lo,
                    j_hi,
                    k_max,
                    seed,
                } => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let dd = d as f64;
                    let shells =
                        |ncomp: usize, s: f64, rng: &mut ChaCha8Rng| {
                            let mut acc = SpectralField::zeros(g, ncomp);
                            for j in j_lo..=j_hi {
                                let lo = 2f64.powi(j);
                                let hi = 2f64.powi(j + 1);
                                let shell = random_field(g, ncomp, rng, |r| {
                                    if r >= lo && r < hi && r <= k_max {
                                        1.0
                                    } else {
                                        0.0
                                    }
                                });
                                let l2 = shell.l2_norm();
                                if l2 > 0.0 {
                                    let amp = 2f64.powf(-(j as f64) * s) * decay.powi(j - j_lo);
                                    acc.axpy(amp / l2, &shell).expect("same shape");
                                }
                            }
                            acc
                        };
                    let mut q = shells(1, dd / 2.0, &mut rng);
                    let mut u = shells(d, dd / 2.0 - 1.0, &mut rng);
                    let qn = part.besov_norm(&q, &BesovIndex::l2_sum(dd / 2.0));
                    let un = part.besov_norm(&u, &BesovIndex::l2_square(dd / 2.0 - 1.0));
                    if qn == 0.0 || un == 0.0 {
                        return Err(Error::Resolution(format!(
                            "no lattice modes in shells {j_lo}..={j_hi} below k_max = {k_max}"
                        )));
                    }
                    q.scale(q_target / qn);
                    u.scale(u_target / un);
                    (q, u, false)
                }
                InitialData::NearVacuum { rho_min, a_u } => {
                    let q = SpectralField::from_fn(g, 1, |x, _| {
                        let c = if d == 1 { x[0].cos() } else { x[0].cos() * x[1].cos() };
                        (rho_min - 1.0) * c
                    });
                    let u = SpectralField::from_fn(
                        g,
                        d,
                        |x, c| if d == 1 { a_u * x[0].sin() } else { a_u * x[1 - c].sin() },
                    );
                    (q, u, true)
                }
            };
        let norms = hypothesis_norms(part, &q0, &u0);
        if !(norms.min_density > VACUUM_FLOOR) {
            return Err(Error::Vacuum {
                min_density: norms.min_density,
                floor: VACUUM_FLOOR,
            });
        }
        if flagged {
            log::warn!(
                "near-vacuum datum with min density {:e} lies outside the theorem's hypotheses",
                norms.min_density
            );
        }
        Ok(InitialDatum {
            q0,
            u0,
            outside_hypotheses: flagged || g.outside_theorem_hypotheses(),
            norms,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::littlewood_paley::make_partition;
    use crate::spectral::PeriodicGrid;

    #[test]
    fn zero_amplitude_trig_is_equilibrium() {
        let g = PeriodicGrid::new(2, 16).unwrap();
        let p = make_partition(&g);
        let d = InitialData::Trig {
            a_q: 0.0,
            a_s: 0.0,
            a_c: 0.0,
        }
        .generate(&p)
        .unwrap();
        assert_eq!(d.q0.max_abs_coefficient(), 0.0);
        assert_eq!(d.u0.max_abs_coefficient(), 0.0);
        assert_eq!(d.norms.min_density, 1.0);
        assert!(!d.outside_hypotheses);
    }

    #[test]
    fn trig_in_one_dimension_is_flagged() {
        let g = PeriodicGrid::new(1, 32).unwrap();
        let p = make_partition(&g);
        let d = InitialData::Trig {
            a_q: 0.1,
            a_s: 0.3,
            a_c: 0.2,
        }
        .generate(&p)
        .unwrap();
        assert!(d.outside_hypotheses);
        assert!((d.u0.sup_norm() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn multiscale_hits_targets() {
        let g = PeriodicGrid::new(2, 64).unwrap();
        let p = make_partition(&g);
        let fam = InitialData::Multiscale {
            q_target: 0.05,
            u_target: 0.03,
            decay: 0.5,
            j_lo: 0,
            j_hi: 4,
            k_max: 21.0,
            seed: 7,
        };
        let d = fam.generate(&p).unwrap();
        assert!((d.norms.q0_crit - 0.05).abs() <= 1e-12);
        assert!((d.norms.u0_22 - 0.03).abs() <= 1e-12);
        assert!(d.norms.q0_mean == 0.0);
        assert!(d.q0.hermitian_defect() <= 1e-15);
        let again = fam.generate(&p).unwrap();
        assert_eq!(again.q0, d.q0);
    }

    #[test]
    fn near_vacuum_is_accepted_and_flagged() {
        let g = PeriodicGrid::new(2, 32).unwrap();
        let p = make_partition(&g);
        let d = InitialData::NearVacuum {
            rho_min: 1e-3,
            a_u: 0.0,
        }
        .generate(&p)
        .unwrap();
        assert!(d.outside_hypotheses);
        assert!((d.norms.min_density - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn vacuum_is_rejected() {
        let g = PeriodicGrid::new(2, 16).unwrap();
        let p = make_partition(&g);
        let r = InitialData::Trig {
            a_q: 1.0,
            a_s: 0.0,
            a_c: 0.0,
        }
        .generate(&p);
        assert!(matches!(r, Err(Error::Vacuum { .. })));
        assert!(InitialData::NearVacuum { rho_min: 0.0, a_u: 0.0 }.generate(&p).is_err());
    }

    #[test]
    fn serde_rejects_unknown_keys() {
        let ok: InitialData = serde_json::from_str(r#"{"family":"trig","a_q":0.1,"a_s":0.0,"a_c":0.0}"#).unwrap();
        assert!(matches!(ok, InitialData::Trig { .. }));
        let bad = serde_json::from_str::<InitialData>(r#"{"family":"trig","a_q":0.1,"a_s":0.0,"a_c":0.0,"b":1}"#);
        assert!(bad.is_err());
    }
}
