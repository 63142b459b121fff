//! Diffusively rescaled Euler–Maxwell system on the 3-torus:
//!
//! ```text
//! ∂t ρ + div q = 0
//! ε² ∂t q + ε² div(q⊗q/ρ) + ∇p(ρ) = −ρE − εq×B − q
//! ∂t E = (1/ε) ∇×B + q
//! ∂t B = −(1/ε) ∇×E
//! div E = 1 − ρ,  div B = 0
//! ```
//!
//! One step is a Strang composition: exact Maxwell rotation over `dt/2`, an
//! IMEX fluid step with Lorentz damping implicit, rotation over `dt/2`.

mod drift;

pub use drift::{
    solve_drift_diffusion, solve_em_corrector, EMCorrectorBundle, EMLimitBundle, EMLimitParams,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler::{PressureLaw, DEFAULT_CFL, GUARD_FACTOR, RHO_MIN};
use crate::fluid::{dealiased_gradient, pressure_gradient, transport};
use crate::spectral::ops::divergence_spectrum;
use crate::spectral::{inv_lap_gradient, sobolev_norm, Complex64, Grid, ScalarField, VectorField};
use crate::stepping::{sample_run, Scheme, TimeStepper, Trajectory, ARS_DELTA, ARS_GAMMA};

/// Tolerance on `‖div E − (1−ρ)‖_{L²}` before a step is rejected.
pub const CONSTRAINT_TOL: f64 = 1e-6;
/// Default `dt ≤ c·ε²` factor.
pub const EPS2_FACTOR: f64 = 0.2;
/// Tolerance on `|mean ρ − 1|`.
pub const MEAN_ONE_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct EMState {
    pub rho: ScalarField,
    pub q: VectorField,
    pub e: VectorField,
    pub b: VectorField,
}

impl EMState {
    pub fn new(rho: ScalarField, q: VectorField, e: VectorField, b: VectorField) -> Result<Self> {
        if rho.grid().dim() != 3 {
            return Err(Error::Dimension("Euler–Maxwell requires d = 3".into()));
        }
        for v in [&q, &e, &b] {
            if v.dim() != 3 {
                return Err(Error::Dimension("vector fields must have 3 components".into()));
            }
            rho.check_same_grid(v.component(0))?;
        }
        Ok(Self { rho, q, e, b })
    }

    /// `(1, 0, 0, B^e)`.
    pub fn equilibrium(grid: &Grid, b_ext: [f64; 3]) -> Result<Self> {
        Self::new(
            ScalarField::constant(grid, 1.0),
            VectorField::zeros(grid),
            VectorField::zeros(grid),
            VectorField::constant(grid, &b_ext)?,
        )
    }

    pub fn grid(&self) -> &Grid {
        self.rho.grid()
    }

    /// `‖div E − (1 − ρ)‖_{L²}`.
    pub fn gauss_residual(&self) -> f64 {
        let grid = self.grid();
        let e_hat: Vec<Vec<Complex64>> = self.e.components().iter().map(ScalarField::spectrum).collect();
        let mut r = divergence_spectrum(grid, &e_hat);
        let rho_hat = self.rho.spectrum();
        for (ri, pi) in r.iter_mut().zip(rho_hat) {
            *ri += pi;
        }
        r[0] -= Complex64::new(1.0, 0.0);
        spectral_l2(grid, &r)
    }

    /// `‖div B‖_{L²}`.
    pub fn div_b(&self) -> f64 {
        let grid = self.grid();
        let b_hat: Vec<Vec<Complex64>> = self.b.components().iter().map(ScalarField::spectrum).collect();
        spectral_l2(grid, &divergence_spectrum(grid, &b_hat))
    }

    pub fn check_density(&self, time: f64) -> Result<()> {
        let min = self.rho.min();
        if !(min > RHO_MIN) {
            return Err(Error::Vacuum { min_density: min, time });
        }
        Ok(())
    }
}

fn spectral_l2(grid: &Grid, spec: &[Complex64]) -> f64 {
    (grid.volume() * spec.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EMParams {
    pub eps: f64,
    pub b_ext: [f64; 3],
    pub dt: Option<f64>,
    pub t_final: f64,
    pub cfl: f64,
    pub scheme: Scheme,
    pub guard_index: f64,
}

impl EMParams {
    pub fn new(eps: f64, b_ext: [f64; 3], t_final: f64) -> Self {
        Self {
            eps,
            b_ext,
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

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::InvalidParameter(format!("eps = {} not in (0, 1]", self.eps)));
        }
        if self.b_ext.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidParameter("background field must be finite".into()));
        }
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
}

/// `min(fluid CFL, 0.2 ε²)`.
pub fn default_em_dt(state: &EMState, law: &PressureLaw, eps: f64, cfl: f64) -> f64 {
    let dx = state.grid().dx();
    let inv = state.rho.map(|r| 1.0 / r);
    let umax = state.q.mul_scalar(&inv).magnitude().max_abs();
    let mut dt = cfl * dx * dx / law.max_dp(state.rho.max());
    if umax > 0.0 {
        dt = dt.min(cfl * dx / umax);
    }
    dt.min(EPS2_FACTOR * eps * eps)
}

/// Build `(ρ₀, ρ₀u₀, Λ⁻²∇ρ₀, B^e)`, which satisfies both constraints.
pub fn make_em_initial(rho0: &ScalarField, u0: &VectorField, b_ext: [f64; 3]) -> Result<EMState> {
    let grid = rho0.grid();
    if grid.dim() != 3 {
        return Err(Error::Dimension("Euler–Maxwell requires d = 3".into()));
    }
    let mean = rho0.mean();
    if (mean - 1.0).abs() > MEAN_ONE_TOL {
        return Err(Error::MeanNotOne { mean });
    }
    let e = inv_lap_gradient(&rho0.shift(-1.0))?;
    let q = u0.mul_scalar(rho0);
    EMState::new(rho0.clone(), q, e, VectorField::constant(grid, &b_ext)?)
}

/// `‖ρ₀−1‖²_{H^m} + ε²‖u₀‖²_{H^m} + ‖E₀‖²_{H^m} + ‖B₀−B^e‖²_{H^m}`.
pub fn em_initial_energy(state: &EMState, eps: f64, b_ext: [f64; 3], m: f64) -> Result<f64> {
    let min = state.rho.min();
    if !(min > 0.0) {
        return Err(Error::Vacuum { min_density: min, time: 0.0 });
    }
    let inv = state.rho.map(|r| 1.0 / r);
    let u = state.q.mul_scalar(&inv);
    let db = state.b.sub(&VectorField::constant(state.grid(), &b_ext)?);
    let sq = |x: f64| x * x;
    Ok(sq(sobolev_norm(&state.rho.shift(-1.0), m))
        + eps * eps * sq(sobolev_norm(&u, m))
        + sq(sobolev_norm(&state.e, m))
        + sq(sobolev_norm(&db, m)))
}

/// Exact solution of `∂t E = (1/ε)∇×B`, `∂t B = −(1/ε)∇×E` over `tau`.
/// Longitudinal parts are untouched; transverse parts rotate with `ω = |k|/ε`.
pub fn maxwell_rotation(e: &VectorField, b: &VectorField, tau: f64, eps: f64) -> (VectorField, VectorField) {
    rotate(e, b, tau, eps, false)
}

/// Rotation kernel; `clean_b` also drops the longitudinal part of `B̂`, which
/// is zero for the exact dynamics and otherwise only collects roundoff.
fn rotate(e: &VectorField, b: &VectorField, tau: f64, eps: f64, clean_b: bool) -> (VectorField, VectorField) {
    let grid = e.grid().clone();
    let mut eh: Vec<Vec<Complex64>> = e.components().iter().map(ScalarField::spectrum).collect();
    let mut bh: Vec<Vec<Complex64>> = b.components().iter().map(ScalarField::spectrum).collect();
    let i_unit = Complex64::new(0.0, 1.0);
    for idx in 1..grid.len() {
        let k = grid.k_odd(idx);
        let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        if kn == 0.0 {
            continue;
        }
        let kh = [k[0] / kn, k[1] / kn, k[2] / kn];
        let theta = kn * tau / eps;
        let (s, c) = theta.sin_cos();
        let ev = [eh[0][idx], eh[1][idx], eh[2][idx]];
        let bv = [bh[0][idx], bh[1][idx], bh[2][idx]];
        let e_par = dot(kh, ev);
        let b_par = if clean_b { Complex64::new(0.0, 0.0) } else { dot(kh, bv) };
        let kxb = cross(kh, bv);
        let kxe = cross(kh, ev);
        for a in 0..3 {
            let e_perp = ev[a] - kh[a] * e_par;
            let b_perp = bv[a] - kh[a] * b_par;
            eh[a][idx] = kh[a] * e_par + c * e_perp + i_unit * s * kxb[a];
            bh[a][idx] = kh[a] * b_par + c * b_perp - i_unit * s * kxe[a];
        }
    }
    let to_field = |h: Vec<Vec<Complex64>>| {
        VectorField::from_raw(h.into_iter().map(|c| ScalarField::from_spectrum(&grid, c)).collect())
    };
    (to_field(eh), to_field(bh))
}

fn dot(a: [f64; 3], v: [Complex64; 3]) -> Complex64 {
    v[0] * a[0] + v[1] * a[1] + v[2] * a[2]
}

fn cross(a: [f64; 3], v: [Complex64; 3]) -> [Complex64; 3] {
    [
        v[2] * a[1] - v[1] * a[2],
        v[0] * a[2] - v[2] * a[0],
        v[1] * a[0] - v[0] * a[1],
    ]
}

/// Solve `a q + β q×B = r` pointwise, then dealias.
fn lorentz_solve(r: &VectorField, b: &VectorField, a: f64, beta: f64) -> VectorField {
    let grid = r.grid();
    let n = grid.len();
    let mut out = vec![vec![0.0; n]; 3];
    let (r0, r1, r2) = (r.component(0).values(), r.component(1).values(), r.component(2).values());
    let (b0, b1, b2) = (b.component(0).values(), b.component(1).values(), b.component(2).values());
    for i in 0..n {
        let rv = [r0[i], r1[i], r2[i]];
        let bv = [b0[i], b1[i], b2[i]];
        let b2n = bv[0] * bv[0] + bv[1] * bv[1] + bv[2] * bv[2];
        let br = bv[0] * rv[0] + bv[1] * rv[1] + bv[2] * rv[2];
        let rxb = [
            rv[1] * bv[2] - rv[2] * bv[1],
            rv[2] * bv[0] - rv[0] * bv[2],
            rv[0] * bv[1] - rv[1] * bv[0],
        ];
        let den = a * (a * a + beta * beta * b2n);
        for c in 0..3 {
            out[c][i] = (a * a * rv[c] - a * beta * rxb[c] + beta * beta * br * bv[c]) / den;
        }
    }
    VectorField::from_raw(out.into_iter().map(|v| ScalarField::from_raw(grid, v)).collect()).dealiased()
}

/// Implicit momentum update `q + (h/ε²)(q + ∇p(ρ) + ρE + εq×B) = rhs`.
fn damped_momentum(
    rhs: &VectorField,
    rho: &ScalarField,
    e: &VectorField,
    b: &VectorField,
    h: f64,
    eps: f64,
    law: &PressureLaw,
) -> VectorField {
    let alpha = h / (eps * eps);
    let force = pressure_gradient(rho, law).add(&e.mul_scalar(rho).dealiased());
    let r = rhs.axpy(-alpha, &force);
    lorentz_solve(&r, b, 1.0 + alpha, h / eps)
}

/// Fluid block with `B` frozen: `(ρ, q, E)` advanced by the IMEX scheme, with
/// `E` receiving `+q` through the same explicit combination as `ρ` receives
/// `−div q`.
fn fluid_step(state: &EMState, h: f64, eps: f64, law: &PressureLaw, scheme: Scheme) -> Result<EMState> {
    let b = &state.b;
    let (rho, q, e) = match scheme {
        Scheme::ImexEuler => {
            let f = transport(&state.rho, &state.q);
            let rho = state.rho.axpy(h, &f.rho);
            check_stage(&rho)?;
            let e = state.e.axpy(h, &state.q);
            let rhs = state.q.axpy(h, &f.q);
            let q = damped_momentum(&rhs, &rho, &e, b, h, eps, law);
            (rho, q, e)
        }
        Scheme::Ars222 => {
            let hg = h * ARS_GAMMA;
            let f1 = transport(&state.rho, &state.q);
            let rho2 = state.rho.axpy(hg, &f1.rho);
            check_stage(&rho2)?;
            let e2 = state.e.axpy(hg, &state.q);
            let rhs2 = state.q.axpy(hg, &f1.q);
            let q2 = damped_momentum(&rhs2, &rho2, &e2, b, hg, eps, law);
            let stiff2 = q2.sub(&rhs2);

            let f2 = transport(&rho2, &q2);
            let rho3 = state
                .rho
                .axpy(h * ARS_DELTA, &f1.rho)
                .axpy(h * (1.0 - ARS_DELTA), &f2.rho);
            check_stage(&rho3)?;
            let e3 = state
                .e
                .axpy(h * ARS_DELTA, &state.q)
                .axpy(h * (1.0 - ARS_DELTA), &q2);
            let rhs3 = state
                .q
                .axpy(h * ARS_DELTA, &f1.q)
                .axpy(h * (1.0 - ARS_DELTA), &f2.q)
                .axpy((1.0 - ARS_GAMMA) / ARS_GAMMA, &stiff2);
            let q3 = damped_momentum(&rhs3, &rho3, &e3, b, hg, eps, law);
            (rho3, q3, e3)
        }
    };
    Ok(EMState {
        rho,
        q,
        e,
        b: b.clone(),
    })
}

fn check_stage(rho: &ScalarField) -> Result<()> {
    let min = rho.min();
    if !(min > RHO_MIN) {
        return Err(Error::Vacuum { min_density: min, time: f64::NAN });
    }
    Ok(())
}

/// One Strang step of the Euler–Maxwell system.
pub fn em_step(state: &EMState, dt: f64, params: &EMParams, law: &PressureLaw) -> Result<EMState> {
    state.check_density(f64::NAN)?;
    let eps = params.eps;
    let (e, b) = maxwell_rotation(&state.e, &state.b, 0.5 * dt, eps);
    let half = EMState {
        rho: state.rho.clone(),
        q: state.q.clone(),
        e,
        b,
    };
    let mut next = fluid_step(&half, dt, eps, law, params.scheme)?;
    let (e, b) = rotate(&next.e, &next.b, 0.5 * dt, eps, true);
    next.e = e;
    next.b = b;
    if !(next.rho.is_finite() && next.q.is_finite() && next.e.is_finite() && next.b.is_finite()) {
        return Err(Error::CflViolation {
            time: f64::NAN,
            norm: f64::INFINITY,
            bound: 0.0,
        });
    }
    let residual = next.gauss_residual();
    if !(residual <= CONSTRAINT_TOL) {
        return Err(Error::ConstraintDrift { time: f64::NAN, residual });
    }
    Ok(next)
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct EMDiagnostics {
    pub steps: usize,
    pub dt: f64,
    pub initial_mass: f64,
    pub max_mass_drift: f64,
    pub min_density: f64,
    pub guard_bound: f64,
    pub max_gauss_residual: f64,
    pub max_div_b: f64,
    /// `(t, ‖div E − (1−ρ)‖_{L²}, ‖div B‖_{L²})` at each sample.
    pub constraint_history: Vec<(f64, f64, f64)>,
}

pub struct EMSolver {
    state: EMState,
    time: f64,
    dt: f64,
    params: EMParams,
    law: PressureLaw,
    diagnostics: EMDiagnostics,
}

impl EMSolver {
    pub fn new(init: EMState, params: &EMParams, law: PressureLaw) -> Result<Self> {
        params.validate()?;
        law.validate()?;
        init.check_density(0.0)?;
        let energy = em_initial_energy(&init, params.eps, params.b_ext, params.guard_index)?;
        let dt = params
            .dt
            .unwrap_or_else(|| default_em_dt(&init, &law, params.eps, params.cfl));
        let diagnostics = EMDiagnostics {
            dt,
            initial_mass: init.rho.mean(),
            min_density: init.rho.min(),
            guard_bound: GUARD_FACTOR * energy.sqrt().max(1e-8),
            ..Default::default()
        };
        Ok(Self {
            state: init,
            time: 0.0,
            dt,
            params: params.clone(),
            law,
            diagnostics,
        })
    }

    pub fn state(&self) -> &EMState {
        &self.state
    }

    pub fn diagnostics(&self) -> &EMDiagnostics {
        &self.diagnostics
    }
}

impl TimeStepper for EMSolver {
    fn time(&self) -> f64 {
        self.time
    }

    fn nominal_dt(&self) -> f64 {
        self.dt
    }

    fn step(&mut self, h: f64) -> Result<()> {
        let t_next = self.time + h;
        let next = em_step(&self.state, h, &self.params, &self.law).map_err(|e| match e {
            Error::Vacuum { min_density, .. } => Error::Vacuum { min_density, time: t_next },
            Error::CflViolation { norm, bound, .. } => Error::CflViolation { time: t_next, norm, bound },
            Error::ConstraintDrift { residual, .. } => Error::ConstraintDrift { time: t_next, residual },
            other => other,
        })?;
        self.state = next;
        self.time = t_next;
        let d = &mut self.diagnostics;
        d.steps += 1;
        d.max_mass_drift = d.max_mass_drift.max((self.state.rho.mean() - d.initial_mass).abs());
        d.min_density = d.min_density.min(self.state.rho.min());
        self.state.check_density(t_next)?;
        let norm = sobolev_norm(&self.state.rho.shift(-1.0), self.params.guard_index);
        if !(norm <= d.guard_bound) {
            return Err(Error::CflViolation {
                time: t_next,
                norm,
                bound: d.guard_bound,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct EMRun {
    pub trajectory: Trajectory<EMState>,
    pub diagnostics: EMDiagnostics,
}

pub fn solve_em(init: EMState, params: &EMParams, law: PressureLaw, sample_times: &[f64]) -> Result<EMRun> {
    let mut solver = EMSolver::new(init, params, law)?;
    let mut trajectory = Trajectory::new();
    sample_run(&mut solver, sample_times, |s| {
        trajectory.push(s.time(), s.state().clone());
        Ok(())
    })?;
    let d = &mut solver.diagnostics;
    for (&t, st) in trajectory.times.iter().zip(&trajectory.states) {
        let (g, db) = (st.gauss_residual(), st.div_b());
        d.max_gauss_residual = d.max_gauss_residual.max(g);
        d.max_div_b = d.max_div_b.max(db);
        d.constraint_history.push((t, g, db));
    }
    Ok(EMRun {
        trajectory,
        diagnostics: solver.diagnostics,
    })
}

/// `−∇p(ρ) − ρE`, dealiased.
pub fn em_darcy_flux(rho: &ScalarField, e: &VectorField, law: &PressureLaw) -> VectorField {
    dealiased_gradient(&law.pressure(rho))
        .add(&e.mul_scalar(rho).dealiased())
        .scale(-1.0)
}
