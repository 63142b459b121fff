//! The porous-medium limit `∂t ρ* = Δp(ρ*)` with Darcy flux `q* = −∇p(ρ*)`,
//! the first-order corrector `∂t ρ₁ = Δ(p'(ρ*)ρ₁)`, `q₁ = −∇(p'(ρ*)ρ₁)`, and
//! the expansion `(ρ* + ερ₁, q* + εq₁)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler::{EulerState, PressureLaw, DEFAULT_CFL, GUARD_FACTOR, RHO_MIN};
use crate::fluid::dealiased_gradient;
use crate::semi_implicit::{max_gap, DiagonalImex, SampleInterpolator, SplitRhs};
use crate::spectral::{sobolev_norm, Complex64, ScalarField, VectorField};
use crate::stepping::{check_aligned, sample_run, Scheme, TimeStepper, Trajectory};

/// Corrector runs need limit samples at least this many steps apart.
pub const MAX_SAMPLE_GAP_STEPS: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitParams {
    pub t_final: f64,
    pub dt: Option<f64>,
    pub cfl: f64,
    pub scheme: Scheme,
    pub guard_index: f64,
}

impl LimitParams {
    pub fn new(t_final: f64) -> Self {
        Self {
            t_final,
            dt: None,
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

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidParameter(format!("final time {} must be > 0", self.t_final)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::InvalidParameter(format!("dt = {dt} must be > 0")));
            }
        }
        Ok(())
    }

    /// Explicit `dt`, or `c·Δx²/p'(ρ_max)`.
    pub fn resolve_dt(&self, rho0: &ScalarField, law: &PressureLaw) -> f64 {
        self.dt.unwrap_or_else(|| {
            let dx = rho0.grid().dx();
            self.cfl * dx * dx / law.max_dp(rho0.max())
        })
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct LimitDiagnostics {
    pub steps: usize,
    pub dt: f64,
    pub max_mass_drift: f64,
    pub min_density: f64,
}

/// Sampled limit solution with its Darcy flux.
#[derive(Clone, Debug)]
pub struct LimitBundle {
    pub rho: Trajectory<ScalarField>,
    pub q: Vec<VectorField>,
    pub diagnostics: LimitDiagnostics,
}

impl LimitBundle {
    pub fn times(&self) -> &[f64] {
        &self.rho.times
    }

    pub fn restrict_to(&self, times: &[f64]) -> Result<Self> {
        let mut rho = Trajectory::new();
        let mut q = Vec::with_capacity(times.len());
        for &t in times {
            let i = self
                .rho
                .index_of(t)
                .ok_or_else(|| Error::Alignment(format!("limit has no sample at t = {t}")))?;
            rho.push(self.rho.times[i], self.rho.states[i].clone());
            q.push(self.q[i].clone());
        }
        Ok(Self {
            rho,
            q,
            diagnostics: self.diagnostics.clone(),
        })
    }

    pub fn state(&self, i: usize) -> EulerState {
        EulerState {
            rho: self.rho.states[i].clone(),
            q: self.q[i].clone(),
        }
    }
}

/// `q* = −∇p(ρ*)`.
pub fn darcy_flux(rho: &ScalarField, law: &PressureLaw) -> VectorField {
    dealiased_gradient(&law.pressure(rho)).scale(-1.0)
}

struct PorousMedium {
    law: PressureLaw,
    c: f64,
    mass: f64,
    max_drift: f64,
    min_density: f64,
    guard_index: f64,
    guard: f64,
}

impl SplitRhs for PorousMedium {
    fn linear(&self, k2: f64) -> f64 {
        -self.c * k2
    }

    fn explicit(&mut self, _t: f64, rho: &ScalarField) -> Result<Vec<Complex64>> {
        let grid = rho.grid();
        let c = self.c;
        let law = self.law;
        let mut spec = rho.map(|r| law.p(r) - c * r).spectrum();
        grid.dealias(&mut spec);
        for (s, &k2) in spec.iter_mut().zip(grid.k2_table()) {
            *s *= -k2;
        }
        Ok(spec)
    }

    fn after_step(&mut self, t: f64, rho: &ScalarField) -> Result<()> {
        let min = rho.min();
        self.min_density = self.min_density.min(min);
        if !(min > RHO_MIN) {
            return Err(Error::Vacuum { min_density: min, time: t });
        }
        self.max_drift = self.max_drift.max((rho.mean() - self.mass).abs());
        let norm = sobolev_norm(&rho.shift(-1.0), self.guard_index);
        if !(norm <= self.guard) {
            return Err(Error::BlowupGuard { time: t, norm, bound: self.guard });
        }
        Ok(())
    }
}

/// Semi-implicit stepper for the porous-medium equation: `p'(1)Δ` implicit,
/// `Δ(p(ρ) − p'(1)ρ)` explicit.
pub struct PorousMediumSolver {
    inner: DiagonalImex<PorousMedium>,
    dt: f64,
}

impl PorousMediumSolver {
    pub fn new(rho0: &ScalarField, params: &LimitParams, law: PressureLaw) -> Result<Self> {
        params.validate()?;
        law.validate()?;
        let min = rho0.min();
        if !(min > RHO_MIN) {
            return Err(Error::Vacuum { min_density: min, time: 0.0 });
        }
        let dt = params.resolve_dt(rho0, &law);
        let init_norm = sobolev_norm(&rho0.shift(-1.0), params.guard_index);
        let rhs = PorousMedium {
            law,
            c: law.dp_at_equilibrium(),
            mass: rho0.mean(),
            max_drift: 0.0,
            min_density: min,
            guard_index: params.guard_index,
            guard: GUARD_FACTOR * init_norm.max(1e-8),
        };
        Ok(Self {
            inner: DiagonalImex::new(rhs, rho0.clone(), dt, params.scheme),
            dt,
        })
    }

    pub fn state(&self) -> &ScalarField {
        self.inner.state()
    }

    pub fn diagnostics(&self) -> LimitDiagnostics {
        LimitDiagnostics {
            steps: self.inner.steps,
            dt: self.dt,
            max_mass_drift: self.inner.rhs.max_drift,
            min_density: self.inner.rhs.min_density,
        }
    }
}

impl TimeStepper for PorousMediumSolver {
    fn time(&self) -> f64 {
        self.inner.time()
    }

    fn nominal_dt(&self) -> f64 {
        self.dt
    }

    fn step(&mut self, h: f64) -> Result<()> {
        self.inner.step(h)
    }
}

/// Porous-medium run recorded at `sample_times`, with the Darcy flux.
pub fn solve_porous_medium(
    rho0: &ScalarField,
    params: &LimitParams,
    law: PressureLaw,
    sample_times: &[f64],
) -> Result<LimitBundle> {
    let mut solver = PorousMediumSolver::new(rho0, params, law)?;
    let (states, _) = sample_run(&mut solver, sample_times, |s| Ok(s.state().clone()))?;
    let q = states.iter().map(|r| darcy_flux(r, &law)).collect();
    Ok(LimitBundle {
        rho: Trajectory {
            times: sample_times.to_vec(),
            states,
        },
        q,
        diagnostics: solver.diagnostics(),
    })
}

/// First-order profiles `(ρ₁, q₁)`.
#[derive(Clone, Debug)]
pub struct CorrectorBundle {
    pub rho1: Trajectory<ScalarField>,
    pub q1: Vec<VectorField>,
    pub rho1_init: ScalarField,
    pub steps: usize,
}

impl CorrectorBundle {
    pub fn times(&self) -> &[f64] {
        &self.rho1.times
    }

    pub fn restrict_to(&self, times: &[f64]) -> Result<Self> {
        let idx = sample_indices(&self.rho1, times)?;
        Ok(Self {
            rho1: self.rho1.restrict_to(times)?,
            q1: idx.iter().map(|&i| self.q1[i].clone()).collect(),
            rho1_init: self.rho1_init.clone(),
            steps: self.steps,
        })
    }
}

/// Positions of `times` within a trajectory.
pub(crate) fn sample_indices<S: Clone>(traj: &Trajectory<S>, times: &[f64]) -> Result<Vec<usize>> {
    times
        .iter()
        .map(|&t| {
            traj.index_of(t)
                .ok_or_else(|| Error::Alignment(format!("no sample at t = {t}")))
        })
        .collect()
}

/// `q₁ = −∇(p'(ρ*)ρ₁)`.
pub fn corrector_flux(rho_star: &ScalarField, rho1: &ScalarField, law: &PressureLaw) -> VectorField {
    let coeff = law.pressure_derivative(rho_star);
    dealiased_gradient(&coeff.mul(rho1)).scale(-1.0)
}

struct LinearFiltration<'a> {
    law: PressureLaw,
    c: f64,
    rho_star: SampleInterpolator<'a>,
}

impl SplitRhs for LinearFiltration<'_> {
    fn linear(&self, k2: f64) -> f64 {
        -self.c * k2
    }

    fn explicit(&mut self, t: f64, rho1: &ScalarField) -> Result<Vec<Complex64>> {
        let grid = rho1.grid();
        let c = self.c;
        let law = self.law;
        let coeff = self.rho_star.at(t).map(|r| law.dp(r) - c);
        let mut spec = coeff.mul(rho1).spectrum();
        grid.dealias(&mut spec);
        for (s, &k2) in spec.iter_mut().zip(grid.k2_table()) {
            *s *= -k2;
        }
        Ok(spec)
    }
}

/// Check that `limit_times` covers `[0, t_end]` with gaps of at most
/// `MAX_SAMPLE_GAP_STEPS · dt`.
pub(crate) fn check_coefficient_sampling(limit_times: &[f64], t_end: f64, dt: f64) -> Result<()> {
    let gap = max_gap(limit_times);
    let limit = MAX_SAMPLE_GAP_STEPS * dt;
    if gap > limit * (1.0 + 1e-12) {
        return Err(Error::SamplingTooCoarse { gap, limit });
    }
    let last = limit_times.last().copied().unwrap_or(0.0);
    if limit_times.first().copied() != Some(0.0) || last < t_end * (1.0 - 1e-12) {
        return Err(Error::Alignment(format!(
            "limit samples cover [0, {last}] but the corrector runs to {t_end}"
        )));
    }
    Ok(())
}

/// Solve the linear filtration equation driven by a sampled limit, with
/// `p'(ρ*)` interpolated linearly in time between limit samples.
pub fn solve_corrector(
    limit: &LimitBundle,
    rho1_0: &ScalarField,
    dt: f64,
    law: PressureLaw,
    scheme: Scheme,
    sample_times: &[f64],
) -> Result<CorrectorBundle> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt = {dt} must be > 0")));
    }
    let times = limit.times();
    let t_end = sample_times.last().copied().unwrap_or(0.0);
    check_coefficient_sampling(times, t_end, dt)?;
    let interp = SampleInterpolator::new(times, &limit.rho.states);
    let rhs = LinearFiltration {
        law,
        c: law.dp_at_equilibrium(),
        rho_star: interp,
    };
    let mut stepper = DiagonalImex::new(rhs, rho1_0.clone(), dt, scheme);
    let (states, _) = sample_run(&mut stepper, sample_times, |s| Ok(s.state().clone()))?;
    let q1 = sample_times
        .iter()
        .zip(&states)
        .map(|(&t, r1)| corrector_flux(&stepper.rhs.rho_star.at(t), r1, &law))
        .collect();
    Ok(CorrectorBundle {
        rho1: Trajectory {
            times: sample_times.to_vec(),
            states,
        },
        q1,
        rho1_init: rho1_0.clone(),
        steps: stepper.steps,
    })
}

/// `(ρ* + ερ₁, q* + εq₁)` at every shared sample.
pub fn expand(limit: &LimitBundle, corrector: &CorrectorBundle, eps: f64) -> Result<Trajectory<EulerState>> {
    check_aligned(limit.times(), corrector.times())?;
    let mut out = Trajectory::new();
    for i in 0..limit.rho.len() {
        let rho = limit.rho.states[i].axpy(eps, &corrector.rho1.states[i]);
        let q = limit.q[i].axpy(eps, &corrector.q1[i]);
        out.push(limit.rho.times[i], EulerState { rho, q });
    }
    Ok(out)
}
