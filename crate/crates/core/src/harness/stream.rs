use crate::error::{Error, Result};
use crate::euler::{EulerSolver, EulerState, PressureLaw, RelaxParams};
use crate::limit::{darcy_flux, LimitBundle, LimitParams, PorousMediumSolver};
use crate::spectral::{divergence, inv_lap_gradient, sobolev_norm, ScalarField, VectorField};
use crate::stepping::{check_aligned, validate_sample_times, Scheme, TimeStepper, Trajectory};

/// Sampled `N(t) = N₀ − ∫₀^t (q^ε − q*) dt'` with `N₀ = −Λ⁻²∇(ρ₀^ε − ρ₀*)`,
/// so that `div N = ρ^ε − ρ*`.
#[derive(Clone, Debug)]
pub struct StreamFunctionSeries {
    pub times: Vec<f64>,
    pub n: Vec<VectorField>,
    /// `‖div N − (ρ^ε − ρ*)‖_{L²}` at each sample.
    pub residuals: Vec<f64>,
}

impl StreamFunctionSeries {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Trapezoid accumulation of `−(q^ε − q*)`.
#[derive(Clone, Debug)]
pub struct StreamAccumulator {
    n: VectorField,
    t: f64,
    last: VectorField,
}

impl StreamAccumulator {
    /// Start from `N₀ = −Λ⁻²∇(ρ₀^ε − ρ₀*)`; the density gap must be mean-free.
    pub fn new(rho0_eps: &ScalarField, rho0_star: &ScalarField, q_gap0: VectorField) -> Result<Self> {
        rho0_eps.check_same_grid(rho0_star)?;
        let n = inv_lap_gradient(&rho0_eps.sub(rho0_star))?.scale(-1.0);
        Ok(Self { n, t: 0.0, last: q_gap0 })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn value(&self) -> &VectorField {
        &self.n
    }

    /// Add the trapezoid panel ending at `t` with momentum gap `q_gap`.
    pub fn push(&mut self, t: f64, q_gap: VectorField) -> Result<()> {
        let h = t - self.t;
        if !(h >= 0.0) {
            return Err(Error::InvalidParameter(format!("stream accumulation went back from {} to {t}", self.t)));
        }
        self.n = self.n.axpy(-0.5 * h, &self.last.add(&q_gap));
        self.t = t;
        self.last = q_gap;
        Ok(())
    }

    /// `‖div N − ρ_gap‖_{L²}`.
    pub fn residual(&self, rho_gap: &ScalarField) -> f64 {
        sobolev_norm(&divergence(&self.n).sub(rho_gap), 0.0)
    }
}

/// Stream function accumulated at the sample cadence of two aligned runs.
pub fn stream_function(
    euler: &Trajectory<EulerState>,
    limit: &LimitBundle,
    rho0_eps: &ScalarField,
    rho0_star: &ScalarField,
) -> Result<StreamFunctionSeries> {
    check_aligned(&euler.times, limit.times())?;
    if euler.is_empty() {
        return Err(Error::InsufficientPoints { needed: 1, got: 0 });
    }
    let gap = |i: usize| euler.states[i].q.sub(&limit.q[i]);
    let mut acc = StreamAccumulator::new(rho0_eps, rho0_star, gap(0))?;
    let mut out = StreamFunctionSeries {
        times: Vec::with_capacity(euler.len()),
        n: Vec::with_capacity(euler.len()),
        residuals: Vec::with_capacity(euler.len()),
    };
    for i in 0..euler.len() {
        let t = euler.times[i];
        if t > acc.time() {
            acc.push(t, gap(i))?;
        }
        let rho_gap = euler.states[i].rho.sub(&limit.rho.states[i]);
        out.times.push(t);
        out.residuals.push(acc.residual(&rho_gap));
        out.n.push(acc.value().clone());
    }
    Ok(out)
}

/// Relaxation and porous-medium runs advanced in lockstep with step `dt`,
/// accumulating `N` after every step.
pub fn stream_function_run(
    init: &EulerState,
    rho0_star: &ScalarField,
    eps: f64,
    law: PressureLaw,
    dt: f64,
    scheme: Scheme,
    sample_times: &[f64],
) -> Result<StreamFunctionSeries> {
    validate_sample_times(sample_times)?;
    let t_final = sample_times.last().copied().unwrap_or(0.0);
    let params = RelaxParams::new(eps, t_final.max(dt)).with_dt(dt).with_scheme(scheme);
    let mut euler = EulerSolver::new(init.clone(), &params, law)?;
    let lp = LimitParams::new(t_final.max(dt)).with_dt(dt).with_scheme(scheme);
    let mut limit = PorousMediumSolver::new(rho0_star, &lp, law)?;
    let gap = |e: &EulerSolver, l: &PorousMediumSolver| e.state().q.sub(&darcy_flux(l.state(), &law));
    let mut acc = StreamAccumulator::new(&init.rho, rho0_star, gap(&euler, &limit))?;
    let mut out = StreamFunctionSeries {
        times: Vec::new(),
        n: Vec::new(),
        residuals: Vec::new(),
    };
    for &target in sample_times {
        loop {
            let remaining = target - euler.time();
            if remaining <= 1e-13 * target.abs().max(1.0) {
                break;
            }
            let h = if remaining <= dt * (1.0 + 1e-9) { remaining } else { dt };
            euler.step(h)?;
            limit.step(h)?;
            acc.push(euler.time(), gap(&euler, &limit))?;
        }
        let rho_gap = euler.state().rho.sub(limit.state());
        out.times.push(target);
        out.residuals.push(acc.residual(&rho_gap));
        out.n.push(acc.value().clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::TWO_PI;
    use crate::limit::solve_porous_medium;
    use crate::spectral::Grid;

    #[test]
    fn identical_runs_give_zero() {
        let g = Grid::new(1, 32, TWO_PI).unwrap();
        let law = PressureLaw::default();
        let rho = ScalarField::from_fn(&g, |x| 1.0 + 0.05 * x[0].cos());
        let times = [0.0, 0.1, 0.2];
        let lim = solve_porous_medium(&rho, &LimitParams::new(0.2), law, &times).unwrap();
        let traj = Trajectory {
            times: times.to_vec(),
            states: (0..3).map(|i| lim.state(i)).collect(),
        };
        let s = stream_function(&traj, &lim, &rho, &rho).unwrap();
        for n in &s.n {
            assert_eq!(n.max_abs(), 0.0);
        }
        assert_eq!(s.max_residual(), 0.0);
    }

    #[test]
    fn initial_value_is_inverse_laplacian_gradient() {
        let g = Grid::new(1, 32, TWO_PI).unwrap();
        let a = ScalarField::from_fn(&g, |x| 1.0 + 0.1 * (2.0 * x[0]).cos());
        let b = ScalarField::constant(&g, 1.0);
        let acc = StreamAccumulator::new(&a, &b, VectorField::zeros(&g)).unwrap();
        // −Λ⁻²∂ₓ(0.1 cos 2x) = 0.05 sin 2x
        let want = VectorField::from_fn(&g, |x| [0.05 * (2.0 * x[0]).sin(), 0.0, 0.0]);
        assert!(sobolev_norm(&acc.value().sub(&want), 0.0) < 1e-15);
        assert!(acc.residual(&a.sub(&b)) < 1e-15);
    }

    #[test]
    fn mean_carrying_gap_is_rejected() {
        let g = Grid::new(1, 16, TWO_PI).unwrap();
        let a = ScalarField::constant(&g, 1.1);
        let b = ScalarField::constant(&g, 1.0);
        assert!(matches!(
            StreamAccumulator::new(&a, &b, VectorField::zeros(&g)),
            Err(Error::MeanNotZero { .. })
        ));
    }
}
