//! Friedrichs-truncated shallow-water solver.
//!
//! With `ρ = 1 + q`, `P(ρ) = ρ^γ` and `G' = P'/ρ`, `G(1) = 0`, the truncated
//! system is
//!
//! ```text
//! ∂_t q + J_n(u·∇q) + J_n((1+q) div u) = 0
//! ∂_t u − 𝒜u + J_n(u·∇u) − 2 J_n(D(u)·∇ln(1+q)) + ∇J_n G(1+q) = 0
//! ```
//!
//! with `D(u)` the symmetric gradient. The velocity is split as
//! `u = u_L + ū`, `u_L = e^{t𝒜} J_n u₀` advanced exactly and `ū(0) = 0`.
//!
//! Time stepping is a Lawson fourth-order Runge-Kutta scheme whose
//! integrating factor is the exact propagator of the linear part
//!
//! ```text
//! ∂_t q = −div ū,   ∂_t ū = 𝒜ū − P'(1)∇q
//! ```
//!
//! so neither viscous nor acoustic stiffness limits the step; only the
//! advective CFL `dt ≤ 2/(n·‖u‖_∞ + 1)` remains.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::littlewood_paley::{friedrichs_truncate, friedrichs_truncate_in_place, FieldSeries};
use crate::paraproduct::VACUUM_FLOOR;
use crate::semigroup::{CoupledPropagator, LamePropagator};
use crate::spectral::{self, PaddedGrid, PeriodicGrid, SpectralField};

/// Velocity magnitude above which a run counts as blown up.
pub const VELOCITY_CEILING: f64 = 1e6;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Barotropic law `P(ρ) = ρ^γ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureLaw {
    gamma: f64,
}

impl PressureLaw {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma > 0.0 && gamma.is_finite() {
            Ok(PressureLaw { gamma })
        } else {
            Err(Error::usage(format!(
                "adiabatic exponent must be positive, got {gamma}"
            )))
        }
    }

    /// Classical shallow water, `γ = 2`.
    pub fn shallow_water() -> Self {
        PressureLaw { gamma: 2.0 }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        rho.powf(self.gamma)
    }

    pub fn derivative(&self, rho: f64) -> f64 {
        self.gamma * rho.powf(self.gamma - 1.0)
    }

    /// `P'(1) = γ`.
    pub fn sound_speed_squared(&self) -> f64 {
        self.gamma
    }

    /// `G(ρ) = γ/(γ−1) (ρ^{γ−1} − 1)`, or `ln ρ` when `γ = 1`.
    pub fn potential(&self, rho: f64) -> f64 {
        let g = self.gamma;
        if g == 1.0 {
            rho.ln()
        } else if g == 2.0 {
            2.0 * (rho - 1.0)
        } else {
            g / (g - 1.0) * (rho.powf(g - 1.0) - 1.0)
        }
    }
}

impl Default for PressureLaw {
    fn default() -> Self {
        Self::shallow_water()
    }
}

/// Switches for the two coupling mechanisms of the system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Physics {
    /// Quadratic and composition terms.
    pub nonlinear: bool,
    /// Linear density-velocity coupling `−div u`, `−P'(1)∇q`.
    pub acoustic: bool,
}

impl Physics {
    pub const FULL: Physics = Physics {
        nonlinear: true,
        acoustic: true,
    };
    /// Both couplings off: `ū` stays zero and `u = u_L`.
    pub const LINEAR_ONLY: Physics = Physics {
        nonlinear: false,
        acoustic: false,
    };
}

impl Default for Physics {
    fn default() -> Self {
        Self::FULL
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub time: f64,
    pub q: SpectralField,
    pub u: SpectralField,
    pub u_l: SpectralField,
    pub u_bar: SpectralField,
}

impl SolverState {
    /// `(J_n q₀, J_n u₀)` with `u_L(0) = J_n u₀` and `ū(0) = 0`.
    pub fn initial(q0: &SpectralField, u0: &SpectralField, n: f64) -> Result<Self> {
        let grid = *q0.grid();
        if q0.ncomp() != 1 || u0.ncomp() != grid.dim() || u0.grid() != &grid {
            return Err(Error::usage(
                "initial data must be a scalar q₀ and a d-vector u₀ on one grid",
            ));
        }
        if !(n >= 1.0) {
            return Err(Error::usage(format!("truncation parameter must be ≥ 1, got {n}")));
        }
        let q = friedrichs_truncate(q0, n);
        let min = 1.0 + q.physical_min(0);
        if !(min > VACUUM_FLOOR) {
            return Err(Error::Vacuum {
                min_density: min,
                floor: VACUUM_FLOOR,
            });
        }
        let u_l = friedrichs_truncate(u0, n);
        let mut u_bar = SpectralField::zeros(grid, grid.dim());
        u_bar.flag_mean_zero(true);
        Ok(SolverState {
            time: 0.0,
            q,
            u: u_l.clone(),
            u_l,
            u_bar,
        })
    }

    pub fn equilibrium(grid: PeriodicGrid) -> Self {
        SolverState {
            time: 0.0,
            q: SpectralField::zeros(grid, 1),
            u: SpectralField::zeros(grid, grid.dim()),
            u_l: SpectralField::zeros(grid, grid.dim()),
            u_bar: SpectralField::zeros(grid, grid.dim()),
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.q.grid()
    }

    /// `|q̂(0)|`.
    pub fn mean_defect(&self) -> f64 {
        self.q.mean(0).norm()
    }

    /// Largest coefficient of `u − (u_L + ū)`.
    pub fn split_defect(&self) -> f64 {
        let s = self.u_l.add(&self.u_bar).expect("state fields share shape");
        self.u.sub(&s).expect("state fields share shape").max_abs_coefficient()
    }

    pub fn min_density(&self) -> f64 {
        1.0 + self.q.physical_min(0)
    }
}

/// Time derivatives of `(q, ū)` without the Lamé term.
#[derive(Clone, Debug)]
pub struct Derivative {
    pub dq: SpectralField,
    pub du_bar: SpectralField,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Form {
    /// Everything except `𝒜ū`.
    Full,
    /// Everything except the integrating-factor generator.
    Remainder,
}

/// Padded grids reused across evaluations.
#[derive(Clone, Debug)]
struct Workspace {
    grid: PeriodicGrid,
    products: PaddedGrid,
    compositions: PaddedGrid,
}

impl Workspace {
    fn new(grid: &PeriodicGrid) -> Self {
        Workspace {
            grid: *grid,
            products: PaddedGrid::three_halves(grid),
            compositions: PaddedGrid::double(grid),
        }
    }

    fn evaluate(
        &self,
        q: &SpectralField,
        u_bar: &SpectralField,
        u_l: &SpectralField,
        n: f64,
        law: &PressureLaw,
        physics: Physics,
        form: Form,
    ) -> Result<(Vec<Complex64>, Vec<Vec<Complex64>>)> {
        let g = &self.grid;
        let d = g.dim();
        let len = g.len();
        let u = u_bar.add(u_l)?;
        let qc = q.component(0);
        let gamma = law.sound_speed_squared();
        let mut dq = vec![ZERO; len];
        let mut du = vec![vec![ZERO; len]; d];

        let mut pressure = vec![ZERO; len];
        if physics.nonlinear {
            let pad = &self.products;
            let pu: Vec<Vec<f64>> = (0..d).map(|c| pad.to_physical(u.component(c))).collect();
            let pq = pad.to_physical(qc);
            let gq: Vec<Vec<f64>> = (0..d).map(|a| pad.to_physical(&spectral::partial(g, qc, a))).collect();
            let gu: Vec<Vec<Vec<f64>>> = (0..d)
                .map(|c| {
                    (0..d)
                        .map(|a| pad.to_physical(&spectral::partial(g, u.component(c), a)))
                        .collect()
                })
                .collect();

            // ln(1+q) and G(1+q) − γq on the finer grid.
            let cpad = &self.compositions;
            let cq = cpad.to_physical(qc);
            let min = cq.iter().cloned().fold(f64::INFINITY, f64::min);
            if !(1.0 + min > VACUUM_FLOOR) {
                return Err(Error::Vacuum {
                    min_density: 1.0 + min,
                    floor: VACUUM_FLOOR,
                });
            }
            let log_vals: Vec<f64> = cq.iter().map(|x| x.ln_1p()).collect();
            let g_vals: Vec<f64> = cq.iter().map(|x| law.potential(1.0 + x) - gamma * x).collect();
            let log_hat = cpad.from_physical(&log_vals);
            pressure = cpad.from_physical(&g_vals);
            let gl: Vec<Vec<f64>> = (0..d)
                .map(|a| pad.to_physical(&spectral::partial(g, &log_hat, a)))
                .collect();

            let m = pad.len();
            let mut aq = vec![0.0; m];
            let mut au = vec![vec![0.0; m]; d];
            for x in 0..m {
                let mut adv = 0.0;
                let mut div = 0.0;
                for a in 0..d {
                    adv += pu[a][x] * gq[a][x];
                    div += gu[a][a][x];
                }
                aq[x] = -(adv + pq[x] * div);
                for c in 0..d {
                    let mut s = 0.0;
                    for a in 0..d {
                        let sym = 0.5 * (gu[c][a][x] + gu[a][c][x]);
                        s += -pu[a][x] * gu[c][a][x] + 2.0 * sym * gl[a][x];
                    }
                    au[c][x] = s;
                }
            }
            dq = pad.from_physical(&aq);
            for c in 0..d {
                du[c] = pad.from_physical(&au[c]);
            }
        }

        // Linear part of the pressure in the full form, and the linear
        // density forcing.
        if physics.acoustic {
            let src = match form {
                Form::Full => &u,
                Form::Remainder => u_l,
            };
            for c in 0..d {
                let dc = spectral::partial(g, src.component(c), c);
                for (x, y) in dq.iter_mut().zip(dc) {
                    *x -= y;
                }
            }
            if form == Form::Full {
                for (p, x) in pressure.iter_mut().zip(qc) {
                    *p += x * gamma;
                }
            }
        }
        friedrichs_truncate_in_place(g, &mut pressure, n);
        for c in 0..d {
            let gp = spectral::partial(g, &pressure, c);
            for (x, y) in du[c].iter_mut().zip(gp) {
                *x -= y;
            }
        }
        friedrichs_truncate_in_place(g, &mut dq, n);
        for c in du.iter_mut() {
            friedrichs_truncate_in_place(g, c, n);
        }
        Ok((dq, du))
    }
}

fn derivative_fields(grid: PeriodicGrid, dq: Vec<Complex64>, du: Vec<Vec<Complex64>>) -> Result<Derivative> {
    let mut dq = SpectralField::from_components(grid, vec![dq])?;
    dq.flag_mean_zero(true);
    let mut du_bar = SpectralField::from_components(grid, du)?;
    du_bar.flag_mean_zero(true);
    Ok(Derivative { dq, du_bar })
}

/// Truncated nonlinear and coupling terms, i.e. the time derivatives of
/// `(q, ū)` minus `𝒜ū`.
pub fn rhs(state: &SolverState, n: f64, law: &PressureLaw, physics: Physics) -> Result<Derivative> {
    let ws = Workspace::new(state.grid());
    let (dq, du) = ws
        .evaluate(&state.q, &state.u_bar, &state.u_l, n, law, physics, Form::Full)
        .map_err(|e| blow_up_from(e, state.time))?;
    derivative_fields(*state.grid(), dq, du)
}

fn blow_up_from(e: Error, time: f64) -> Error {
    match e {
        Error::Vacuum { min_density, .. } => Error::BlowUp {
            time,
            min_density,
            reason: "vacuum".into(),
        },
        other => other,
    }
}

pub fn dt_default(n: f64, umax: f64) -> f64 {
    0.5 / (n * umax + 1.0)
}

pub fn dt_max(n: f64, umax: f64) -> f64 {
    2.0 / (n * umax + 1.0)
}

#[derive(Clone, Debug)]
enum LinearFactor {
    Coupled(CoupledPropagator),
    Viscous(LamePropagator),
}

impl LinearFactor {
    fn new(grid: &PeriodicGrid, h: f64, law: &PressureLaw, physics: Physics) -> Result<Self> {
        Ok(if physics.acoustic {
            LinearFactor::Coupled(CoupledPropagator::new(grid, h, law.sound_speed_squared(), 2.0)?)
        } else {
            LinearFactor::Viscous(LamePropagator::new(grid, h)?)
        })
    }

    fn apply(&self, y: &Pair) -> Result<Pair> {
        Ok(match self {
            LinearFactor::Coupled(p) => {
                let (q, u) = p.apply(&y.q, &y.u)?;
                Pair { q, u }
            }
            LinearFactor::Viscous(p) => Pair {
                q: y.q.clone(),
                u: p.apply(&y.u)?,
            },
        })
    }
}

#[derive(Clone, Debug)]
struct Pair {
    q: SpectralField,
    u: SpectralField,
}

impl Pair {
    fn axpy(&self, h: f64, k: &Pair) -> Result<Pair> {
        let mut q = self.q.clone();
        q.axpy(h, &k.q)?;
        let mut u = self.u.clone();
        u.axpy(h, &k.u)?;
        Ok(Pair { q, u })
    }
}

/// Lawson RK4 stepper with propagators cached for one step size.
#[derive(Clone, Debug)]
pub struct Stepper {
    dt: f64,
    n: f64,
    law: PressureLaw,
    physics: Physics,
    ws: Workspace,
    half: LinearFactor,
    full: LinearFactor,
    lame_half: LamePropagator,
    lame_full: LamePropagator,
}

impl Stepper {
    pub fn new(grid: &PeriodicGrid, dt: f64, n: f64, law: PressureLaw, physics: Physics) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::usage(format!("step size must be positive, got {dt}")));
        }
        Ok(Stepper {
            dt,
            n,
            law,
            physics,
            ws: Workspace::new(grid),
            half: LinearFactor::new(grid, 0.5 * dt, &law, physics)?,
            full: LinearFactor::new(grid, dt, &law, physics)?,
            lame_half: LamePropagator::new(grid, 0.5 * dt)?,
            lame_full: LamePropagator::new(grid, dt)?,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn remainder(&self, y: &Pair, u_l: &SpectralField) -> Result<Pair> {
        let (dq, du) = self
            .ws
            .evaluate(&y.q, &y.u, u_l, self.n, &self.law, self.physics, Form::Remainder)?;
        let d = derivative_fields(self.ws.grid, dq, du)?;
        Ok(Pair { q: d.dq, u: d.du_bar })
    }

    /// One step without the CFL check.
    pub fn advance(&self, state: &SolverState) -> Result<SolverState> {
        let h = self.dt;
        let t = state.time;
        self.advance_inner(state)
            .map_err(|e| blow_up_from(e, t + h))
            .and_then(check_blow_up)
    }

    fn advance_inner(&self, state: &SolverState) -> Result<SolverState> {
        let h = self.dt;
        let y = Pair {
            q: state.q.clone(),
            u: state.u_bar.clone(),
        };
        let ul_half = self.lame_half.apply(&state.u_l)?;
        let ul_full = self.lame_full.apply(&state.u_l)?;

        let k1 = self.remainder(&y, &state.u_l)?;
        let ey_half = self.half.apply(&y)?;
        let ey_full = self.full.apply(&y)?;
        let u2 = self.half.apply(&y.axpy(0.5 * h, &k1)?)?;
        let k2 = self.remainder(&u2, &ul_half)?;
        let u3 = ey_half.axpy(0.5 * h, &k2)?;
        let k3 = self.remainder(&u3, &ul_half)?;
        let ek3 = self.half.apply(&k3)?;
        let u4 = ey_full.axpy(h, &ek3)?;
        let k4 = self.remainder(&u4, &ul_full)?;

        let ek1 = self.full.apply(&k1)?;
        let k23 = k2.axpy(1.0, &k3)?;
        let ek23 = self.half.apply(&k23)?;
        let mut next = ey_full.axpy(h / 6.0, &ek1)?;
        next = next.axpy(h / 3.0, &ek23)?;
        next = next.axpy(h / 6.0, &k4)?;

        let mut q = next.q;
        q.make_mean_zero();
        let mut u_bar = next.u;
        u_bar.flag_mean_zero(true);
        let u = ul_full.add(&u_bar)?;
        Ok(SolverState {
            time: state.time + h,
            q,
            u,
            u_l: ul_full,
            u_bar,
        })
    }

    /// One step; rejects `dt > dt_max(n)`.
    pub fn step(&self, state: &SolverState) -> Result<SolverState> {
        let umax = state.u.sup_norm();
        let limit = dt_max(self.n, umax);
        if self.dt > limit {
            return Err(Error::StepSize {
                dt: self.dt,
                dt_max: limit,
            });
        }
        self.advance(state)
    }
}

fn check_blow_up(s: SolverState) -> Result<SolverState> {
    let fail = |reason: &str, min_density: f64| Error::BlowUp {
        time: s.time,
        min_density,
        reason: reason.into(),
    };
    if !(s.q.is_finite() && s.u.is_finite()) {
        return Err(fail("non-finite coefficient", f64::NAN));
    }
    let min = s.min_density();
    if !(min > VACUUM_FLOOR) {
        return Err(fail("vacuum", min));
    }
    if s.u.sup_norm() > VELOCITY_CEILING {
        return Err(fail("velocity ceiling exceeded", min));
    }
    Ok(s)
}

/// One Lawson step from `state`.
pub fn step(state: &SolverState, dt: f64, n: f64, law: &PressureLaw, physics: Physics) -> Result<SolverState> {
    Stepper::new(state.grid(), dt, n, *law, physics)?.step(state)
}

/// Which samples a run keeps in memory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Retain {
    /// Every sample.
    All,
    /// First and last sample only; observers still see every sample.
    Endpoints,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub t_final: f64,
    pub n: f64,
    pub law: PressureLaw,
    pub physics: Physics,
    /// Fixed step; defaults to `dt_default(n, ‖u₀‖_∞)`.
    pub dt: Option<f64>,
    /// Sample every `sample_stride` steps (the final state is always sampled).
    pub sample_stride: usize,
    /// Record blow-up in the trajectory instead of returning an error.
    pub survey: bool,
    pub retain: Retain,
}

impl RunConfig {
    pub fn new(t_final: f64, n: f64) -> Self {
        RunConfig {
            t_final,
            n,
            law: PressureLaw::default(),
            physics: Physics::FULL,
            dt: None,
            sample_stride: 1,
            survey: false,
            retain: Retain::All,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Termination {
    Completed,
    BlowUp {
        time: f64,
        min_density: f64,
        reason: String,
    },
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub states: Vec<SolverState>,
    pub dt: f64,
    pub steps: usize,
    pub sample_stride: usize,
    pub termination: Termination,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.time).collect()
    }

    pub fn last(&self) -> &SolverState {
        self.states
            .last()
            .expect("trajectories hold at least the initial state")
    }

    pub fn completed(&self) -> bool {
        self.termination == Termination::Completed
    }

    /// Field series of one state component for time norms.
    pub fn series(&self, pick: impl Fn(&SolverState) -> &SpectralField) -> Result<FieldSeries> {
        FieldSeries::new(self.times(), self.states.iter().map(|s| pick(s).clone()).collect())
    }

    pub fn weights(&self) -> Vec<f64> {
        crate::littlewood_paley::trapezoid_weights(&self.times())
    }
}

pub fn run(q0: &SpectralField, u0: &SpectralField, cfg: &RunConfig) -> Result<Trajectory> {
    run_with(q0, u0, cfg, |_| {})
}

/// Runs to `cfg.t_final`, calling `observer` on every sample. The step is
/// fixed for the run except that it is halved whenever the advective limit
/// would be exceeded, and the last step is shortened to land on `t_final`.
pub fn run_with(
    q0: &SpectralField,
    u0: &SpectralField,
    cfg: &RunConfig,
    mut observer: impl FnMut(&SolverState),
) -> Result<Trajectory> {
    if !(cfg.t_final >= 0.0 && cfg.t_final.is_finite()) {
        return Err(Error::usage("final time must be finite and nonnegative"));
    }
    if cfg.sample_stride == 0 {
        return Err(Error::usage("sample stride must be at least 1"));
    }
    let state0 = SolverState::initial(q0, u0, cfg.n)?;
    let grid = *state0.grid();
    let umax0 = state0.u.sup_norm();
    let mut dt = cfg.dt.unwrap_or_else(|| dt_default(cfg.n, umax0));
    if !(dt > 0.0) {
        return Err(Error::usage("step size must be positive"));
    }
    let mut stepper = Stepper::new(&grid, dt, cfg.n, cfg.law, cfg.physics)?;
    let mut states = vec![state0.clone()];
    observer(&state0);
    let mut state = state0;
    let mut steps = 0usize;
    let mut termination = Termination::Completed;
    let tol = 1e-12 * cfg.t_final.max(1.0);
    while state.time < cfg.t_final - tol {
        let remaining = cfg.t_final - state.time;
        let limit = dt_max(cfg.n, state.u.sup_norm());
        while dt > limit {
            dt *= 0.5;
            log::info!("step halved to {dt:e} at t = {}", state.time);
            stepper = Stepper::new(&grid, dt, cfg.n, cfg.law, cfg.physics)?;
        }
        let result = if remaining < dt * (1.0 + 1e-9) && (remaining - dt).abs() > tol {
            Stepper::new(&grid, remaining, cfg.n, cfg.law, cfg.physics)?.advance(&state)
        } else {
            stepper.advance(&state)
        };
        let mut next = match result {
            Ok(s) => s,
            Err(Error::BlowUp {
                time,
                min_density,
                reason,
            }) if cfg.survey => {
                termination = Termination::BlowUp {
                    time,
                    min_density,
                    reason,
                };
                break;
            }
            Err(e) => return Err(e),
        };
        if (cfg.t_final - next.time).abs() <= tol {
            next.time = cfg.t_final;
        }
        steps += 1;
        let last = next.time >= cfg.t_final - tol;
        if steps.is_multiple_of(cfg.sample_stride) || last {
            observer(&next);
            match cfg.retain {
                Retain::All => states.push(next.clone()),
                Retain::Endpoints => {
                    if states.len() > 1 {
                        states.pop();
                    }
                    states.push(next.clone());
                }
            }
        }
        state = next;
    }
    if states.last().map(|s| s.time) != Some(state.time) {
        // Blow-up between samples: keep the last good state.
        observer(&state);
        states.push(state);
    }
    Ok(Trajectory {
        states,
        dt,
        steps,
        sample_stride: cfg.sample_stride,
        termination,
    })
}

/// Classical RK4 for the frozen transport `∂_t q + J_n(u·∇q) = 0`; `dt`
/// may be negative.
pub fn advect_frozen(q: &SpectralField, u: &SpectralField, dt: f64, n: f64) -> Result<SpectralField> {
    let grid = *q.grid();
    let pad = PaddedGrid::three_halves(&grid);
    let d = grid.dim();
    let pu: Vec<Vec<f64>> = (0..d).map(|c| pad.to_physical(u.component(c))).collect();
    let f = |q: &SpectralField| -> Result<SpectralField> {
        let m = pad.len();
        let mut acc = vec![0.0; m];
        for a in 0..d {
            let g = pad.to_physical(&spectral::partial(&grid, q.component(0), a));
            for x in 0..m {
                acc[x] -= pu[a][x] * g[x];
            }
        }
        let mut c = pad.from_physical(&acc);
        friedrichs_truncate_in_place(&grid, &mut c, n);
        SpectralField::from_components(grid, vec![c])
    };
    let k1 = f(q)?;
    let mut s = q.clone();
    s.axpy(0.5 * dt, &k1)?;
    let k2 = f(&s)?;
    let mut s = q.clone();
    s.axpy(0.5 * dt, &k2)?;
    let k3 = f(&s)?;
    let mut s = q.clone();
    s.axpy(dt, &k3)?;
    let k4 = f(&s)?;
    let mut out = q.clone();
    out.axpy(dt / 6.0, &k1)?;
    out.axpy(dt / 3.0, &k2)?;
    out.axpy(dt / 3.0, &k3)?;
    out.axpy(dt / 6.0, &k4)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::lame_flow;

    fn grid() -> PeriodicGrid {
        PeriodicGrid::new(2, 16).unwrap()
    }

    #[test]
    fn pressure_law_basics() {
        let law = PressureLaw::shallow_water();
        assert_eq!(law.potential(1.0), 0.0);
        assert_eq!(law.potential(1.5), 1.0);
        assert_eq!(PressureLaw::new(1.0).unwrap().potential(1.0), 0.0);
        assert_eq!(PressureLaw::new(1.4).unwrap().potential(1.0), 0.0);
        assert!(PressureLaw::new(0.0).is_err());
        assert!(PressureLaw::new(f64::NAN).is_err());
    }

    #[test]
    fn potential_derivative_by_complex_step() {
        for gamma in [1.0, 1.4, 2.0, 3.0, 0.5] {
            let law = PressureLaw::new(gamma).unwrap();
            let g = law.gamma();
            let h = 1e-30;
            for k in 0..=99 {
                let rho = 0.1 + k as f64 * (9.9 / 99.0);
                let z = Complex64::new(rho, h);
                let gz = if g == 1.0 {
                    z.ln()
                } else {
                    (z.powf(g - 1.0) - 1.0) * (g / (g - 1.0))
                };
                let deriv = gz.im / h;
                let want = law.derivative(rho) / rho;
                assert!((deriv - want).abs() <= 1e-10 * want.abs().max(1.0), "γ={gamma} ρ={rho}");
            }
        }
    }

    #[test]
    fn equilibrium_is_fixed() {
        let s = SolverState::equilibrium(grid());
        let d = rhs(&s, 5.0, &PressureLaw::default(), Physics::FULL).unwrap();
        assert_eq!(d.dq.max_abs_coefficient(), 0.0);
        assert_eq!(d.du_bar.max_abs_coefficient(), 0.0);
        let next = step(&s, 0.01, 5.0, &PressureLaw::default(), Physics::FULL).unwrap();
        assert!(next.q.max_abs_coefficient() <= 1e-14);
        assert!(next.u.max_abs_coefficient() <= 1e-14);
    }

    #[test]
    fn linear_only_reproduces_lame_flow() {
        let g = grid();
        let u0 = SpectralField::from_fn(g, 2, |x, c| {
            if c == 0 {
                x[0].sin() + x[1].cos()
            } else {
                (2.0 * x[0]).cos()
            }
        });
        let q0 = SpectralField::zeros(g, 1);
        let s0 = SolverState::initial(&q0, &u0, 5.0).unwrap();
        let s1 = step(&s0, 0.05, 5.0, &PressureLaw::default(), Physics::LINEAR_ONLY).unwrap();
        let want = lame_flow(&s0.u, 0.05).unwrap();
        assert!(s1.u.sub(&want).unwrap().max_abs_coefficient() <= 1e-12);
        assert_eq!(s1.u_bar.max_abs_coefficient(), 0.0);
    }

    #[test]
    fn cfl_violation_is_reported() {
        let g = grid();
        let u0 = SpectralField::from_fn(g, 2, |x, c| if c == 0 { x[1].sin() } else { 0.0 });
        let s0 = SolverState::initial(&SpectralField::zeros(g, 1), &u0, 5.0).unwrap();
        match step(&s0, 1.0, 5.0, &PressureLaw::default(), Physics::FULL) {
            Err(Error::StepSize { dt, dt_max }) => assert!(dt > dt_max),
            other => panic!("expected a step-size error, got {other:?}"),
        }
    }

    #[test]
    fn vacuum_at_start_is_rejected() {
        let g = grid();
        let q0 = SpectralField::from_fn(g, 1, |x, _| -1.2 * x[0].cos());
        let r = SolverState::initial(&q0, &SpectralField::zeros(g, 2), 5.0);
        assert!(matches!(r, Err(Error::Vacuum { .. })));
    }
}
