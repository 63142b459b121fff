//! Quick invariant self-tests, run by `relaxlab check`.

use serde::{Deserialize, Serialize};

use crate::data::TWO_PI;
use crate::error::Result;
use crate::euler::{imex_step, solve_euler, EulerState, PressureLaw, RelaxParams};
use crate::harness::{fit_points, InitialLayer};
use crate::limit::{darcy_flux, solve_porous_medium, LimitParams};
use crate::maxwell::{maxwell_rotation, solve_drift_diffusion, EMLimitParams};
use crate::spectral::{
    curl, divergence, fractional_op, gradient, laplacian, sobolev_norm, Grid, ScalarField, VectorField,
};
use crate::stepping::{uniform_times, Scheme};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Copy)]
enum Bound {
    Below,
    AtLeast,
}

fn check(name: &str, tolerance: f64, bound: Bound, f: impl FnOnce() -> Result<f64>) -> CheckResult {
    let value = f().unwrap_or(f64::NAN);
    let pass = value.is_finite()
        && match bound {
            Bound::Below => value < tolerance,
            Bound::AtLeast => value >= tolerance,
        };
    CheckResult {
        name: name.into(),
        value,
        tolerance,
        pass,
    }
}

fn trig3(g: &Grid) -> ScalarField {
    ScalarField::from_fn(g, |x| (x[0] + 2.0 * x[1]).sin() * (3.0 * x[2]).cos() + 0.3 * (x[1] - x[2]).cos())
}

/// Run every self-test; errors abort only the failing check.
pub fn run_checks() -> Vec<CheckResult> {
    let law = PressureLaw::default();
    let mut out = Vec::new();

    out.push(check("gradient of sin(2x)cos(y), N=64", 1e-10, Bound::Below, || {
        let g = Grid::new(2, 64, TWO_PI)?;
        let f = ScalarField::from_fn(&g, |x| (2.0 * x[0]).sin() * x[1].cos());
        let want = VectorField::from_fn(&g, |x| {
            [2.0 * (2.0 * x[0]).cos() * x[1].cos(), -(2.0 * x[0]).sin() * x[1].sin(), 0.0]
        });
        Ok(gradient(&f).sub(&want).max_abs())
    }));

    out.push(check("div grad = laplacian", 1e-12, Bound::Below, || {
        let g = Grid::new(3, 16, TWO_PI)?;
        let f = trig3(&g);
        let e = divergence(&gradient(&f)).sub(&laplacian(&f)).max_abs();
        Ok(e)
    }));

    out.push(check("curl grad = 0", 1e-12, Bound::Below, || {
        let g = Grid::new(3, 16, TWO_PI)?;
        Ok(curl(&gradient(&trig3(&g)))?.max_abs())
    }));

    out.push(check("inverse laplacian round trip", 1e-12, Bound::Below, || {
        let g = Grid::new(3, 16, TWO_PI)?;
        let f = trig3(&g);
        let back = fractional_op(&fractional_op(&f, 2.0)?, -2.0)?;
        Ok(back.sub(&f).max_abs())
    }));

    out.push(check("maxwell rotation isometry", 1e-12, Bound::Below, || {
        let g = Grid::new(3, 16, TWO_PI)?;
        let e = VectorField::from_fn(&g, |x| [x[1].sin(), (2.0 * x[2]).cos(), (x[0] + x[1]).sin()]);
        let b = VectorField::from_fn(&g, |x| [(x[2]).cos(), (x[0] - x[2]).sin(), 0.5]);
        let before = sobolev_norm(&e, 0.0).hypot(sobolev_norm(&b, 0.0));
        let (e2, b2) = maxwell_rotation(&e, &b, 0.37, 0.05);
        let after = sobolev_norm(&e2, 0.0).hypot(sobolev_norm(&b2, 0.0));
        Ok((after - before).abs() / before)
    }));

    out.push(check("euler mass drift", 1e-12, Bound::Below, || {
        let g = Grid::new(1, 64, TWO_PI)?;
        let rho = ScalarField::from_fn(&g, |x| 1.0 + 0.1 * x[0].cos());
        let q = VectorField::from_fn(&g, |x| [0.2 * (2.0 * x[0]).sin(), 0.0, 0.0]);
        let run = solve_euler(EulerState::new(rho, q)?, &RelaxParams::new(0.1, 0.1), law, &uniform_times(0.1, 3))?;
        Ok(run.diagnostics.max_mass_drift)
    }));

    out.push(check("porous medium mass drift", 1e-12, Bound::Below, || {
        let g = Grid::new(1, 64, TWO_PI)?;
        let rho = ScalarField::from_fn(&g, |x| 1.0 + 0.1 * x[0].cos());
        let lim = solve_porous_medium(&rho, &LimitParams::new(0.1), law, &uniform_times(0.1, 3))?;
        Ok(lim.diagnostics.max_mass_drift)
    }));

    out.push(check("drift-diffusion mass drift", 1e-12, Bound::Below, || {
        let g = Grid::new(3, 8, TWO_PI)?;
        let rho = ScalarField::from_fn(&g, |x| 1.0 + 0.05 * (x[0] + x[2]).cos());
        let lim = solve_drift_diffusion(&rho, &EMLimitParams::new(0.05), law, &uniform_times(0.05, 3))?;
        Ok(lim.max_mass_drift)
    }));

    out.push(check("stiff step projects onto darcy law", 1e3, Bound::AtLeast, || {
        let g = Grid::new(1, 64, TWO_PI)?;
        let rho = ScalarField::from_fn(&g, |x| 1.0 + 0.1 * x[0].cos());
        let q = VectorField::from_fn(&g, |x| [x[0].cos(), 0.0, 0.0]);
        let gap = |s: &EulerState| sobolev_norm(&s.q.sub(&darcy_flux(&s.rho, &law)), 0.0);
        let s0 = EulerState::new(rho, q)?;
        let s1 = imex_step(&s0, 1e-3, 1e-6, &law, Scheme::Ars222)?;
        Ok(gap(&s0) / gap(&s1))
    }));

    out.push(check("rate fit of a linear ladder", 1e-12, Bound::Below, || {
        let f = fit_points("x", &[0.2, 0.1, 0.05], &[0.02, 0.01, 0.005])?;
        Ok((f.slope - 1.0).abs())
    }));

    out.push(check("initial layer halves at eps^2 ln 2", 1e-15, Bound::Below, || {
        let g = Grid::new(1, 16, TWO_PI)?;
        let q0 = VectorField::from_fn(&g, |x| [x[0].sin() + 0.5, 0.0, 0.0]);
        let l = InitialLayer::new(q0.clone(), 0.1)?;
        let half = l.eval(0.01 * std::f64::consts::LN_2)?;
        Ok(half.sub(&q0.scale(0.5)).max_abs())
    }));

    out
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        for c in super::run_checks() {
            assert!(c.pass, "{c:?}");
        }
    }
}
