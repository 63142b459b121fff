//! Dealiased fluid tendencies shared by the Euler and Euler–Maxwell solvers.

use crate::euler::PressureLaw;
use crate::spectral::ops::{derivative_spectrum, divergence_spectrum};
use crate::spectral::{Complex64, Grid, ScalarField, VectorField};

/// Non-stiff tendencies `(−div q, −div(q⊗q/ρ))`.
pub(crate) struct Transport {
    pub rho: ScalarField,
    pub q: VectorField,
}

#[allow(clippy::needless_range_loop)]
pub(crate) fn transport(rho: &ScalarField, q: &VectorField) -> Transport {
    let grid = rho.grid();
    let d = grid.dim();

    let q_hat: Vec<Vec<Complex64>> = q.components().iter().map(ScalarField::spectrum).collect();
    let mut div_q = divergence_spectrum(grid, &q_hat);
    grid.dealias(&mut div_q);
    for c in div_q.iter_mut() {
        *c = -*c;
    }
    let d_rho = ScalarField::from_spectrum(grid, div_q);

    let inv_rho = rho.map(|r| 1.0 / r);
    let u: Vec<ScalarField> = q.components().iter().map(|c| c.mul(&inv_rho)).collect();

    // flux[a][b] = q_a u_b, symmetric
    let mut flux_hat: Vec<Vec<Option<Vec<Complex64>>>> = vec![vec![None; d]; d];
    for a in 0..d {
        for b in a..d {
            let mut spec = q.component(a).mul(&u[b]).spectrum();
            grid.dealias(&mut spec);
            flux_hat[a][b] = Some(spec);
        }
    }
    let mut comps = Vec::with_capacity(d);
    for a in 0..d {
        let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
        for b in 0..d {
            let spec = if a <= b { &flux_hat[a][b] } else { &flux_hat[b][a] };
            let deriv = derivative_spectrum(grid, spec.as_ref().expect("filled"), b);
            for (s, v) in acc.iter_mut().zip(deriv) {
                *s -= v;
            }
        }
        comps.push(ScalarField::from_spectrum(grid, acc));
    }
    Transport {
        rho: d_rho,
        q: VectorField::from_raw(comps),
    }
}

/// Dealiased gradient of a nodal scalar.
pub(crate) fn dealiased_gradient(f: &ScalarField) -> VectorField {
    let grid = f.grid();
    let mut spec = f.spectrum();
    grid.dealias(&mut spec);
    gradient_of(grid, &spec)
}

pub(crate) fn gradient_of(grid: &Grid, spec: &[Complex64]) -> VectorField {
    VectorField::from_raw(
        (0..grid.dim())
            .map(|a| ScalarField::from_spectrum(grid, derivative_spectrum(grid, spec, a)))
            .collect(),
    )
}

/// `∇p(ρ)`, dealiased.
pub(crate) fn pressure_gradient(rho: &ScalarField, law: &PressureLaw) -> VectorField {
    dealiased_gradient(&law.pressure(rho))
}
