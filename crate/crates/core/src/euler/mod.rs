//! Diffusively rescaled damped Euler system in conservative variables:
//!
//! ```text
//! ∂t ρ + div q = 0
//! ε² ∂t q + ε² div(q⊗q/ρ) + ∇p(ρ) = −q
//! ```
//!
//! Transport is explicit; the relaxation `−(q + ∇p(ρ))/ε²` is implicit and
//! pointwise solvable because the density of each stage is known before its
//! momentum. As `ε → 0` the update collapses onto `q = −∇p(ρ)`, i.e. onto an
//! explicit discretization of `∂t ρ = Δp(ρ)`.

mod pressure;

pub use pressure::PressureLaw;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluid::{pressure_gradient, transport};
use crate::spectral::{sobolev_norm, ScalarField, VectorField};
use crate::stepping::{sample_run, Scheme, TimeStepper, Trajectory, ARS_DELTA, ARS_GAMMA};

/// Lower edge of the admissible density band.
pub const RHO_MIN: f64 = 0.1;
/// Guard ratio: a run aborts once `‖ρ−1‖_{H^m}` exceeds this multiple of the
/// initial energy bound.
pub const GUARD_FACTOR: f64 = 10.0;
/// Default CFL safety factor.
pub const DEFAULT_CFL: f64 = 0.25;

#[derive(Clone, Debug)]
pub struct EulerState {
    pub rho: ScalarField,
    pub q: VectorField,
}

impl EulerState {
    pub fn new(rho: ScalarField, q: VectorField) -> Result<Self> {
        if q.dim() != rho.grid().dim() {
            return Err(Error::Dimension("momentum must have d components".into()));
        }
        rho.check_same_grid(q.component(0))?;
        Ok(Self { rho, q })
    }

    /// Constant equilibrium `(1, 0)`.
    pub fn equilibrium(grid: &crate::spectral::Grid) -> Self {
        Self {
            rho: ScalarField::constant(grid, 1.0),
            q: VectorField::zeros(grid),
        }
    }

    pub fn velocity(&self) -> VectorField {
        let inv = self.rho.map(|r| 1.0 / r);
        self.q.mul_scalar(&inv)
    }

    pub fn check_density(&self, time: f64) -> Result<()> {
        let min = self.rho.min();
        if !(min > RHO_MIN) {
            return Err(Error::Vacuum { min_density: min, time });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxParams {
    pub eps: f64,
    /// Fixed step; `None` selects the default policy.
    pub dt: Option<f64>,
    pub t_final: f64,
    pub cfl: f64,
    pub scheme: Scheme,
    /// Sobolev index used by the blow-up guard.
    pub guard_index: f64,
}

impl RelaxParams {
    pub fn new(eps: f64, t_final: f64) -> Self {
        Self {
            eps,
            dt: None,
            t_final,
            cfl: DEFAULT_CFL,
            scheme: Scheme::default(),
            guard_index: 3.0,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::InvalidParameter(format!("eps = {} not in (0, 1]", self.eps)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidParameter(format!("final time {} must be > 0", self.t_final)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::InvalidParameter(format!("dt = {dt} must be > 0")));
            }
        }
        if !(self.cfl > 0.0) {
            return Err(Error::InvalidParameter("CFL factor must be > 0".into()));
        }
        Ok(())
    }
}

/// Default step `min(c·Δx/max|u|, c·Δx²/p'(ρ_max))`; independent of ε.
pub fn default_dt(state: &EulerState, law: &PressureLaw, cfl: f64) -> f64 {
    let dx = state.rho.grid().dx();
    let umax = state.velocity().magnitude().max_abs();
    let parabolic = cfl * dx * dx / law.max_dp(state.rho.max());
    if umax > 0.0 {
        parabolic.min(cfl * dx / umax)
    } else {
        parabolic
    }
}

/// `‖ρ₀−1‖²_{H^m} + ε²‖u₀‖²_{H^m}`.
pub fn initial_energy(state: &EulerState, eps: f64, m: f64) -> Result<f64> {
    let min = state.rho.min();
    if !(min > 0.0) {
        return Err(Error::Vacuum { min_density: min, time: 0.0 });
    }
    let drho = sobolev_norm(&state.rho.shift(-1.0), m);
    let u = sobolev_norm(&state.velocity(), m);
    Ok(drho * drho + eps * eps * u * u)
}

/// Non-stiff tendencies `(−div q, −div(q⊗q/ρ))`, dealiased.
pub fn euler_rhs_nonstiff(state: &EulerState) -> Result<(ScalarField, VectorField)> {
    state.check_density(f64::NAN)?;
    let t = transport(&state.rho, &state.q);
    Ok((t.rho, t.q))
}

/// Implicit relaxation substep at frozen density:
/// `q ← (q − (dt/ε²)∇p(ρ)) / (1 + dt/ε²)`.
pub fn relaxation_substep(
    q: &VectorField,
    rho: &ScalarField,
    dt: f64,
    eps: f64,
    law: &PressureLaw,
) -> VectorField {
    let alpha = dt / (eps * eps);
    let grad_p = pressure_gradient(rho, law);
    q.axpy(-alpha, &grad_p).scale(1.0 / (1.0 + alpha))
}

/// One IMEX step of the rescaled Euler system.
pub fn imex_step(
    state: &EulerState,
    dt: f64,
    eps: f64,
    law: &PressureLaw,
    scheme: Scheme,
) -> Result<EulerState> {
    state.check_density(f64::NAN)?;
    let next = match scheme {
        Scheme::ImexEuler => {
            let f = transport(&state.rho, &state.q);
            let rho = state.rho.axpy(dt, &f.rho);
            let rhs = state.q.axpy(dt, &f.q);
            let q = relaxation_substep(&rhs, &rho, dt, eps, law);
            EulerState { rho, q }
        }
        Scheme::Ars222 => {
            let hg = dt * ARS_GAMMA;
            let f1 = transport(&state.rho, &state.q);
            let rho2 = state.rho.axpy(hg, &f1.rho);
            check_stage(&rho2)?;
            let rhs2 = state.q.axpy(hg, &f1.q);
            let q2 = relaxation_substep(&rhs2, &rho2, hg, eps, law);
            // hγ·S₂ recovered from the implicit solve, free of 1/ε² cancellation
            let stiff2 = q2.sub(&rhs2);

            let f2 = transport(&rho2, &q2);
            let rho3 = state
                .rho
                .axpy(dt * ARS_DELTA, &f1.rho)
                .axpy(dt * (1.0 - ARS_DELTA), &f2.rho);
            check_stage(&rho3)?;
            let rhs3 = state
                .q
                .axpy(dt * ARS_DELTA, &f1.q)
                .axpy(dt * (1.0 - ARS_DELTA), &f2.q)
                .axpy((1.0 - ARS_GAMMA) / ARS_GAMMA, &stiff2);
            let q3 = relaxation_substep(&rhs3, &rho3, hg, eps, law);
            EulerState { rho: rho3, q: q3 }
        }
    };
    if !(next.rho.is_finite() && next.q.is_finite()) {
        return Err(Error::CflViolation {
            time: f64::NAN,
            norm: f64::INFINITY,
            bound: 0.0,
        });
    }
    Ok(next)
}

fn check_stage(rho: &ScalarField) -> Result<()> {
    let min = rho.min();
    if !(min > RHO_MIN) {
        return Err(Error::Vacuum { min_density: min, time: f64::NAN });
    }
    Ok(())
}

/// Per-run bookkeeping.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub steps: usize,
    pub dt: f64,
    pub initial_mass: f64,
    pub max_mass_drift: f64,
    pub min_density: f64,
    pub guard_bound: f64,
    /// `(t, ‖ρ−1‖_{H^m})` at each sample.
    pub energy_history: Vec<(f64, f64)>,
}

/// Stateful integrator for [`imex_step`] with mass and blow-up monitoring.
pub struct EulerSolver {
    state: EulerState,
    time: f64,
    dt: f64,
    eps: f64,
    law: PressureLaw,
    scheme: Scheme,
    guard_index: f64,
    diagnostics: RunDiagnostics,
}

impl EulerSolver {
    pub fn new(init: EulerState, params: &RelaxParams, law: PressureLaw) -> Result<Self> {
        params.validate()?;
        law.validate()?;
        init.check_density(0.0)?;
        let energy = initial_energy(&init, params.eps, params.guard_index)?;
        let dt = params.dt.unwrap_or_else(|| default_dt(&init, &law, params.cfl));
        let mass = init.rho.mean();
        let diagnostics = RunDiagnostics {
            dt,
            initial_mass: mass,
            min_density: init.rho.min(),
            guard_bound: GUARD_FACTOR * energy.sqrt().max(1e-8),
            ..Default::default()
        };
        Ok(Self {
            state: init,
            time: 0.0,
            dt,
            eps: params.eps,
            law,
            scheme: params.scheme,
            guard_index: params.guard_index,
            diagnostics,
        })
    }

    pub fn state(&self) -> &EulerState {
        &self.state
    }

    pub fn diagnostics(&self) -> &RunDiagnostics {
        &self.diagnostics
    }

    pub fn perturbation_norm(&self) -> f64 {
        sobolev_norm(&self.state.rho.shift(-1.0), self.guard_index)
    }
}

impl TimeStepper for EulerSolver {
    fn time(&self) -> f64 {
        self.time
    }

    fn nominal_dt(&self) -> f64 {
        self.dt
    }

    fn step(&mut self, h: f64) -> Result<()> {
        let t_next = self.time + h;
        let next = imex_step(&self.state, h, self.eps, &self.law, self.scheme).map_err(|e| match e {
            Error::Vacuum { min_density, .. } => Error::Vacuum { min_density, time: t_next },
            Error::CflViolation { norm, bound, .. } => Error::CflViolation { time: t_next, norm, bound },
            other => other,
        })?;
        self.state = next;
        self.time = t_next;
        self.diagnostics.steps += 1;

        let drift = (self.state.rho.mean() - self.diagnostics.initial_mass).abs();
        self.diagnostics.max_mass_drift = self.diagnostics.max_mass_drift.max(drift);
        let min = self.state.rho.min();
        self.diagnostics.min_density = self.diagnostics.min_density.min(min);
        self.state.check_density(t_next)?;

        let norm = self.perturbation_norm();
        if !(norm <= self.diagnostics.guard_bound) {
            return Err(Error::CflViolation {
                time: t_next,
                norm,
                bound: self.diagnostics.guard_bound,
            });
        }
        Ok(())
    }
}

/// A completed run: samples plus diagnostics.
#[derive(Clone, Debug)]
pub struct EulerRun {
    pub trajectory: Trajectory<EulerState>,
    pub diagnostics: RunDiagnostics,
}

/// Integrate from `init` and record the state at each sample time.
pub fn solve_euler(
    init: EulerState,
    params: &RelaxParams,
    law: PressureLaw,
    sample_times: &[f64],
) -> Result<EulerRun> {
    let mut solver = EulerSolver::new(init, params, law)?;
    let mut trajectory = Trajectory::new();
    let (_, _) = sample_run(&mut solver, sample_times, |s| {
        trajectory.push(s.time(), s.state().clone());
        Ok(())
    })?;
    for (t, st) in trajectory.iter() {
        let norm = sobolev_norm(&st.rho.shift(-1.0), solver.guard_index);
        solver.diagnostics.energy_history.push((t, norm));
    }
    Ok(EulerRun {
        trajectory,
        diagnostics: solver.diagnostics,
    })
}
