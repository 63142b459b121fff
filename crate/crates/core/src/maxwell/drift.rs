//! Drift-diffusion limit `∂t ρ* = div(∇p(ρ*) + ρ*E*)`, `E* = ∇Λ⁻²(ρ*−1)`, and
//! the first-order Euler–Maxwell corrector.

use serde::{Deserialize, Serialize};

use super::{em_darcy_flux, MEAN_ONE_TOL};
use crate::error::{Error, Result};
use crate::euler::{PressureLaw, DEFAULT_CFL, GUARD_FACTOR, RHO_MIN};
use crate::fluid::dealiased_gradient;
use crate::limit::check_coefficient_sampling;
use crate::semi_implicit::{DiagonalImex, SampleInterpolator, SplitRhs};
use crate::spectral::ops::{check_mean_zero, divergence_spectrum, fractional_spectrum, gradient_from_spectrum};
use crate::spectral::{inv_lap_curl, sobolev_norm, Complex64, Grid, ScalarField, VectorField};
use crate::stepping::{sample_run, Scheme, Trajectory};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EMLimitParams {
    pub t_final: f64,
    pub dt: Option<f64>,
    pub cfl: f64,
    pub scheme: Scheme,
    pub guard_index: f64,
}

impl EMLimitParams {
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

    pub fn resolve_dt(&self, rho0: &ScalarField, law: &PressureLaw) -> f64 {
        self.dt.unwrap_or_else(|| {
            let dx = rho0.grid().dx();
            self.cfl * dx * dx / law.max_dp(rho0.max())
        })
    }
}

/// `∇Λ⁻²` of a spectrum, ignoring its mean mode.
fn inv_lap_gradient_spec(grid: &Grid, spec: &[Complex64]) -> VectorField {
    let mut s = spec.to_vec();
    fractional_spectrum(grid, &mut s, -2.0);
    gradient_from_spectrum(grid, &s)
}

/// `E* = ∇Λ⁻²(ρ* − 1)`.
fn electric_field(rho: &ScalarField) -> VectorField {
    inv_lap_gradient_spec(rho.grid(), &rho.spectrum())
}

fn div_dealiased(v: &VectorField) -> Vec<Complex64> {
    let grid = v.grid();
    let comps: Vec<Vec<Complex64>> = v
        .components()
        .iter()
        .map(|c| {
            let mut s = c.spectrum();
            grid.dealias(&mut s);
            s
        })
        .collect();
    divergence_spectrum(grid, &comps)
}

fn laplacian_dealiased(f: &ScalarField) -> Vec<Complex64> {
    let grid = f.grid();
    let mut s = f.spectrum();
    grid.dealias(&mut s);
    for (c, &k2) in s.iter_mut().zip(grid.k2_table()) {
        *c *= -k2;
    }
    s
}

/// Sampled drift-diffusion solution. Only `ρ*` is stored; the potential,
/// field and flux are derived on demand.
#[derive(Clone, Debug)]
pub struct EMLimitBundle {
    pub rho: Trajectory<ScalarField>,
    pub law: PressureLaw,
    pub steps: usize,
    pub dt: f64,
    pub max_mass_drift: f64,
}

impl EMLimitBundle {
    pub fn times(&self) -> &[f64] {
        &self.rho.times
    }

    /// `φ* = Λ⁻²(ρ* − 1)`.
    pub fn phi(&self, i: usize) -> ScalarField {
        let rho = &self.rho.states[i];
        let mut s = rho.spectrum();
        fractional_spectrum(rho.grid(), &mut s, -2.0);
        ScalarField::from_spectrum(rho.grid(), s)
    }

    /// `E* = ∇φ* = Λ⁻²∇ρ*`.
    pub fn e_star(&self, i: usize) -> VectorField {
        electric_field(&self.rho.states[i])
    }

    /// `q* = −∇p(ρ*) − ρ*E*`.
    pub fn q_star(&self, i: usize) -> VectorField {
        em_darcy_flux(&self.rho.states[i], &self.e_star(i), &self.law)
    }

    pub fn restrict_to(&self, times: &[f64]) -> Result<Self> {
        Ok(Self {
            rho: self.rho.restrict_to(times)?,
            law: self.law,
            steps: self.steps,
            dt: self.dt,
            max_mass_drift: self.max_mass_drift,
        })
    }
}

struct DriftDiffusion {
    law: PressureLaw,
    c: f64,
    mass: f64,
    max_drift: f64,
    guard_index: f64,
    guard: f64,
}

impl SplitRhs for DriftDiffusion {
    fn linear(&self, k2: f64) -> f64 {
        if k2 == 0.0 {
            0.0
        } else {
            -(self.c * k2 + 1.0)
        }
    }

    fn explicit(&mut self, _t: f64, rho: &ScalarField) -> Result<Vec<Complex64>> {
        let (law, c) = (self.law, self.c);
        let mut out = laplacian_dealiased(&rho.map(|r| law.p(r) - c * r));
        let drift = electric_field(rho).mul_scalar(&rho.shift(-1.0));
        for (o, d) in out.iter_mut().zip(div_dealiased(&drift)) {
            *o += d;
        }
        Ok(out)
    }

    fn after_step(&mut self, t: f64, rho: &ScalarField) -> Result<()> {
        let min = rho.min();
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

/// Semi-implicit solve of the drift-diffusion system: `−(p'(1)|k|² + 1)`
/// implicit, `Δ(p(ρ) − p'(1)ρ) + div((ρ−1)E*)` explicit.
pub fn solve_drift_diffusion(
    rho0: &ScalarField,
    params: &EMLimitParams,
    law: PressureLaw,
    sample_times: &[f64],
) -> Result<EMLimitBundle> {
    law.validate()?;
    let mean = rho0.mean();
    if (mean - 1.0).abs() > MEAN_ONE_TOL {
        return Err(Error::MeanNotOne { mean });
    }
    let min = rho0.min();
    if !(min > RHO_MIN) {
        return Err(Error::Vacuum { min_density: min, time: 0.0 });
    }
    if !(params.t_final > 0.0) {
        return Err(Error::InvalidParameter(format!("final time {} must be > 0", params.t_final)));
    }
    let dt = params.resolve_dt(rho0, &law);
    let init_norm = sobolev_norm(&rho0.shift(-1.0), params.guard_index);
    let rhs = DriftDiffusion {
        law,
        c: law.dp_at_equilibrium(),
        mass: mean,
        max_drift: 0.0,
        guard_index: params.guard_index,
        guard: GUARD_FACTOR * init_norm.max(1e-8),
    };
    let mut stepper = DiagonalImex::new(rhs, rho0.clone(), dt, params.scheme);
    let (states, _) = sample_run(&mut stepper, sample_times, |s| Ok(s.state().clone()))?;
    Ok(EMLimitBundle {
        rho: Trajectory {
            times: sample_times.to_vec(),
            states,
        },
        law,
        steps: stepper.steps,
        dt,
        max_mass_drift: stepper.rhs.max_drift,
    })
}

/// First-order Euler–Maxwell profiles at the requested times.
#[derive(Clone, Debug)]
pub struct EMCorrectorBundle {
    pub rho1: Trajectory<ScalarField>,
    /// `E₁ = Λ⁻²∇ρ₁`.
    pub e1: Vec<VectorField>,
    /// `B₁ = −Λ⁻²∇×q*`.
    pub b1: Vec<VectorField>,
    /// `q₁ = −∇(p'(ρ*)ρ₁) − (ρ*E₁ + ρ₁E*) − q*×B^e`.
    pub q1: Vec<VectorField>,
    pub steps: usize,
}

impl EMCorrectorBundle {
    pub fn times(&self) -> &[f64] {
        &self.rho1.times
    }

    pub fn restrict_to(&self, times: &[f64]) -> Result<Self> {
        let idx = crate::limit::sample_indices(&self.rho1, times)?;
        let pick = |v: &[VectorField]| idx.iter().map(|&i| v[i].clone()).collect();
        Ok(Self {
            rho1: self.rho1.restrict_to(times)?,
            e1: pick(&self.e1),
            b1: pick(&self.b1),
            q1: pick(&self.q1),
            steps: self.steps,
        })
    }
}

struct EMCorrectorRhs<'a> {
    law: PressureLaw,
    c: f64,
    b_ext: [f64; 3],
    rho_star: SampleInterpolator<'a>,
}

impl EMCorrectorRhs<'_> {
    fn background(&self, grid: &Grid) -> VectorField {
        VectorField::constant(grid, &self.b_ext).expect("d = 3 checked on entry")
    }
}

impl SplitRhs for EMCorrectorRhs<'_> {
    fn linear(&self, k2: f64) -> f64 {
        if k2 == 0.0 {
            0.0
        } else {
            -(self.c * k2 + 1.0)
        }
    }

    fn explicit(&mut self, t: f64, rho1: &ScalarField) -> Result<Vec<Complex64>> {
        let grid = rho1.grid();
        let (law, c) = (self.law, self.c);
        let rho_star = self.rho_star.at(t);
        let e_star = electric_field(&rho_star);
        let q_star = em_darcy_flux(&rho_star, &e_star, &law);
        let rho1_hat = rho1.spectrum();
        let e1 = inv_lap_gradient_spec(grid, &rho1_hat);

        let mut out = laplacian_dealiased(&rho_star.map(|r| law.dp(r) - c).mul(rho1));
        let flux = e_star
            .mul_scalar(rho1)
            .add(&e1.mul_scalar(&rho_star.shift(-1.0)))
            .add(&q_star.cross(&self.background(grid))?);
        for (o, d) in out.iter_mut().zip(div_dealiased(&flux)) {
            *o += d;
        }
        Ok(out)
    }
}

/// `q₁` from `(ρ*, ρ₁)` and the derived fields.
fn em_corrector_flux(
    rho_star: &ScalarField,
    rho1: &ScalarField,
    e_star: &VectorField,
    e1: &VectorField,
    q_star: &VectorField,
    b_ext: &VectorField,
    law: &PressureLaw,
) -> Result<VectorField> {
    let coeff = law.pressure_derivative(rho_star);
    let lorentz = e1.mul_scalar(rho_star).add(&e_star.mul_scalar(rho1));
    Ok(dealiased_gradient(&coeff.mul(rho1))
        .add(&lorentz.dealiased())
        .add(&q_star.cross(b_ext)?.dealiased())
        .scale(-1.0))
}

/// Solve the corrector equation
/// `∂t ρ₁ = div(∇(p'(ρ*)ρ₁) + ρ₁E* + ρ*∇Λ⁻²ρ₁) + div(q*×B^e)`
/// from `ρ₁(0) = rho1_0` (zero when `None`).
pub fn solve_em_corrector(
    limit: &EMLimitBundle,
    b_ext: [f64; 3],
    dt: f64,
    scheme: Scheme,
    sample_times: &[f64],
    rho1_0: Option<&ScalarField>,
) -> Result<EMCorrectorBundle> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt = {dt} must be > 0")));
    }
    let first = limit
        .rho
        .first()
        .ok_or_else(|| Error::Alignment("empty limit trajectory".into()))?;
    let grid = first.grid().clone();
    if grid.dim() != 3 {
        return Err(Error::Dimension("Euler–Maxwell requires d = 3".into()));
    }
    let t_end = sample_times.last().copied().unwrap_or(0.0);
    check_coefficient_sampling(limit.times(), t_end, dt)?;
    let rho1_init = match rho1_0 {
        Some(r) => {
            check_mean_zero(&r.spectrum())?;
            r.clone()
        }
        None => ScalarField::zeros(&grid),
    };
    let law = limit.law;
    let rhs = EMCorrectorRhs {
        law,
        c: law.dp_at_equilibrium(),
        b_ext,
        rho_star: SampleInterpolator::new(limit.times(), &limit.rho.states),
    };
    let mut stepper = DiagonalImex::new(rhs, rho1_init, dt, scheme);
    let (states, _) = sample_run(&mut stepper, sample_times, |s| Ok(s.state().clone()))?;

    let background = VectorField::constant(&grid, &b_ext)?;
    let (mut e1s, mut b1s, mut q1s) = (Vec::new(), Vec::new(), Vec::new());
    for (&t, rho1) in sample_times.iter().zip(&states) {
        let rho_star = stepper.rhs.rho_star.at(t);
        let e_star = electric_field(&rho_star);
        let q_star = em_darcy_flux(&rho_star, &e_star, &law);
        let e1 = inv_lap_gradient_spec(&grid, &rho1.spectrum());
        let b1 = inv_lap_curl(&q_star)?.scale(-1.0);
        let q1 = em_corrector_flux(&rho_star, rho1, &e_star, &e1, &q_star, &background, &law)?;
        e1s.push(e1);
        b1s.push(b1);
        q1s.push(q1);
    }
    Ok(EMCorrectorBundle {
        rho1: Trajectory {
            times: sample_times.to_vec(),
            states,
        },
        e1: e1s,
        b1: b1s,
        q1: q1s,
        steps: stepper.steps,
    })
}
