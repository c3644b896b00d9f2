//! Scenario files.
//!
//! A scenario is a TOML document with the sections `[grid]`, `[physics]`,
//! `[initial]` and `[run]`. Unknown keys are rejected at every level.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use swbench::friedrichs::{Physics, PressureLaw};
use swbench::initial_data::InitialData;
use swbench::PeriodicGrid;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// The only seed of a scenario; it replaces the seed of random data families.
    #[serde(default)]
    pub seed: u64,
    pub grid: GridSection,
    #[serde(default)]
    pub physics: PhysicsSection,
    pub initial: InitialData,
    pub run: RunSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dim: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Switch off both the nonlinear and the acoustic coupling.
    #[serde(default)]
    pub linear_only: bool,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        PhysicsSection {
            gamma: default_gamma(),
            linear_only: false,
        }
    }
}

fn default_gamma() -> f64 {
    2.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Keyword {
    Auto,
}

/// A final time, or `"auto"` for the horizon fixed by the smallness conditions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Horizon {
    Fixed(f64),
    Auto(Keyword),
}

impl std::str::FromStr for Horizon {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(Horizon::Auto(Keyword::Auto));
        }
        s.parse::<f64>()
            .map(Horizon::Fixed)
            .map_err(|_| format!("expected a number or \"auto\", got {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub t_final: Horizon,
    /// Friedrichs truncation `n`; defaults to `N/3`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_trunc: Option<f64>,
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// Fixed step for runs with a fixed horizon; defaults to the solver's choice.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "default_stride")]
    pub sample_stride: usize,
    /// Steps per run when the horizon is automatic.
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub checkpoints: bool,
}

fn default_eta() -> f64 {
    0.1
}

fn default_stride() -> usize {
    1
}

fn default_steps() -> usize {
    40
}

pub const PRESETS: &[&str] = &["small-data", "trig", "large-data", "near-vacuum", "band-limited"];

pub fn preset(name: &str) -> Result<Scenario> {
    let run = |t_final| RunSection {
        t_final,
        n_trunc: None,
        eta: default_eta(),
        dt: None,
        sample_stride: 1,
        steps: default_steps(),
        checkpoints: false,
    };
    let grid = |n| GridSection {
        dim: 2,
        n,
        periods: None,
    };
    let s = match name {
        "small-data" => Scenario {
            name: name.into(),
            seed: 1,
            grid: grid(128),
            physics: PhysicsSection::default(),
            initial: InitialData::Multiscale {
                q_target: 0.05,
                u_target: 0.05,
                decay: 0.5,
                j_lo: 0,
                j_hi: 5,
                k_max: 128.0 / 3.0,
                seed: 1,
            },
            run: run(Horizon::Auto(Keyword::Auto)),
        },
        "trig" => Scenario {
            name: name.into(),
            seed: 0,
            grid: grid(32),
            physics: PhysicsSection::default(),
            initial: InitialData::Trig {
                a_q: 0.2,
                a_s: 0.2,
                a_c: 0.2,
            },
            run: RunSection {
                n_trunc: Some(10.0),
                dt: Some(0.01),
                ..run(Horizon::Fixed(0.2))
            },
        },
        "large-data" => Scenario {
            name: name.into(),
            seed: 2,
            grid: grid(64),
            physics: PhysicsSection::default(),
            initial: InitialData::Multiscale {
                q_target: 0.8,
                u_target: 1.0,
                decay: 0.5,
                j_lo: 0,
                j_hi: 4,
                k_max: 20.0,
                seed: 2,
            },
            run: run(Horizon::Fixed(0.5)),
        },
        "near-vacuum" => Scenario {
            name: name.into(),
            seed: 0,
            grid: grid(64),
            physics: PhysicsSection::default(),
            initial: InitialData::NearVacuum {
                rho_min: 1e-3,
                a_u: 0.1,
            },
            run: RunSection {
                dt: Some(1e-3),
                ..run(Horizon::Fixed(0.05))
            },
        },
        "band-limited" => Scenario {
            name: name.into(),
            seed: 3,
            grid: grid(128),
            physics: PhysicsSection::default(),
            initial: InitialData::Multiscale {
                q_target: 0.3,
                u_target: 0.3,
                decay: 1.0,
                j_lo: 0,
                j_hi: 3,
                k_max: 15.9,
                seed: 3,
            },
            run: RunSection {
                sample_stride: 5,
                ..run(Horizon::Fixed(0.5))
            },
        },
        other => bail!("unknown preset {other:?}; available: {}", PRESETS.join(", ")),
    };
    Ok(s)
}

pub fn parse(text: &str) -> Result<Scenario> {
    let s: Scenario = toml::from_str(text)?;
    if let InitialData::Multiscale { seed, .. } = s.initial {
        if seed != 0 && seed != s.seed {
            bail!("[initial] seed = {seed} disagrees with the scenario seed {}", s.seed);
        }
    }
    Ok(s)
}

pub fn load(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Flag overrides applied on top of a preset or scenario file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub name: Option<String>,
    pub grid: Option<usize>,
    pub dim: Option<usize>,
    pub gamma: Option<f64>,
    pub t_final: Option<Horizon>,
    pub n_trunc: Option<f64>,
    pub eta: Option<f64>,
    pub seed: Option<u64>,
    pub checkpoints: bool,
}

impl Scenario {
    pub fn apply(mut self, o: &Overrides) -> Self {
        if let Some(v) = &o.name {
            self.name = v.clone();
        }
        if let Some(v) = o.grid {
            self.grid.n = v;
            if let InitialData::Multiscale { k_max, .. } = &mut self.initial {
                *k_max = k_max.min(v as f64 / 3.0);
            }
        }
        if let Some(v) = o.dim {
            self.grid.dim = v;
            self.grid.periods = None;
        }
        if let Some(v) = o.gamma {
            self.physics.gamma = v;
        }
        if let Some(v) = o.t_final {
            self.run.t_final = v;
        }
        if let Some(v) = o.n_trunc {
            self.run.n_trunc = Some(v);
        }
        if let Some(v) = o.eta {
            self.run.eta = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if o.checkpoints {
            self.run.checkpoints = true;
        }
        if let InitialData::Multiscale { seed, .. } = &mut self.initial {
            *seed = self.seed;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) || self.name.starts_with('.') {
            bail!("scenario name {:?} is not a plain directory name", self.name);
        }
        if self.run.sample_stride == 0 || self.run.steps == 0 {
            bail!("sample_stride and steps must be at least 1");
        }
        if let Horizon::Fixed(t) = self.run.t_final {
            if !(t >= 0.0 && t.is_finite()) {
                bail!("t_final must be finite and nonnegative, got {t}");
            }
        }
        if let Some(n) = self.run.n_trunc {
            if !(n > 0.0 && n.is_finite()) {
                bail!("n_trunc must be positive, got {n}");
            }
        }
        self.initial.validate()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<PeriodicGrid> {
        Ok(match &self.grid.periods {
            Some(p) => PeriodicGrid::with_periods(self.grid.dim, self.grid.n, p)?,
            None => PeriodicGrid::new(self.grid.dim, self.grid.n)?,
        })
    }

    pub fn law(&self) -> Result<PressureLaw> {
        Ok(PressureLaw::new(self.physics.gamma)?)
    }

    pub fn physics(&self) -> Physics {
        if self.physics.linear_only {
            Physics::LINEAR_ONLY
        } else {
            Physics::FULL
        }
    }

    pub fn n_trunc(&self) -> f64 {
        self.run.n_trunc.unwrap_or(self.grid.n as f64 / 3.0)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip_through_toml() {
        for name in PRESETS {
            let s = preset(name).unwrap();
            s.validate().unwrap();
            let back = parse(&s.to_toml().unwrap()).unwrap();
            assert_eq!(back, s, "{name}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut text = preset("trig").unwrap().to_toml().unwrap();
        text = text.replace("[grid]\n", "[grid]\nspacing = 3\n");
        assert!(parse(&text).is_err());
        let text = format!("colour = 1\n{}", preset("trig").unwrap().to_toml().unwrap());
        assert!(parse(&text).is_err());
    }

    #[test]
    fn horizon_accepts_number_integer_and_auto() {
        let base = preset("trig").unwrap().to_toml().unwrap();
        let with = |v: &str| base.replace("t_final = 0.2", &format!("t_final = {v}"));
        assert_eq!(parse(&with("1")).unwrap().run.t_final, Horizon::Fixed(1.0));
        assert_eq!(
            parse(&with("\"auto\"")).unwrap().run.t_final,
            Horizon::Auto(Keyword::Auto)
        );
        assert!(parse(&with("\"soon\"")).is_err());
        assert_eq!("auto".parse::<Horizon>().unwrap(), Horizon::Auto(Keyword::Auto));
        assert!("x".parse::<Horizon>().is_err());
    }

    #[test]
    fn scenario_seed_drives_random_data() {
        let s = preset("small-data").unwrap().apply(&Overrides {
            seed: Some(9),
            ..Overrides::default()
        });
        assert!(matches!(s.initial, InitialData::Multiscale { seed: 9, .. }));
        let mut text = preset("small-data").unwrap().to_toml().unwrap();
        text = text.replacen("seed = 1\n", "seed = 4\n", 1);
        assert!(parse(&text).is_err());
    }

    #[test]
    fn bad_names_are_rejected() {
        let mut s = preset("trig").unwrap();
        s.name = "../x".into();
        assert!(s.validate().is_err());
    }
}
