//! Fourier-multiplier differential operators.
//!
//! Every operator transforms, multiplies mode by mode and transforms back.
//! Odd-order multipliers drop the Nyquist mode so real input stays real.

use rustfft::num_complex::Complex64;

use super::{Grid, ScalarField, VectorField};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Relative tolerance for the zero-mean precondition of negative-order operators.
pub const MEAN_REL_TOL: f64 = 1e-12;
/// Absolute floor below which a mean is treated as roundoff.
pub const MEAN_ABS_FLOOR: f64 = 1e-14;

/// Reject spectra whose mean mode is not negligible.
pub(crate) fn check_mean_zero(coeffs: &[Complex64]) -> Result<()> {
    let mean = coeffs[0].re;
    let rms = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if mean.abs() > MEAN_REL_TOL * rms && mean.abs() > MEAN_ABS_FLOOR {
        return Err(Error::MeanNotZero { mean, rms });
    }
    Ok(())
}

/// `∂_axis` applied to a spectrum.
pub(crate) fn derivative_spectrum(grid: &Grid, coeffs: &[Complex64], axis: usize) -> Vec<Complex64> {
    coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| I * grid.k_odd(i)[axis] * c)
        .collect()
}

/// Divergence of a vector given by component spectra; result is a spectrum.
pub(crate) fn divergence_spectrum(grid: &Grid, comps: &[Vec<Complex64>]) -> Vec<Complex64> {
    let mut out = vec![ZERO; grid.len()];
    for (i, slot) in out.iter_mut().enumerate() {
        let k = grid.k_odd(i);
        let mut acc = ZERO;
        for (axis, c) in comps.iter().enumerate() {
            acc += k[axis] * c[i];
        }
        *slot = I * acc;
    }
    out
}

/// Gradient of a spectrum as nodal vector field.
pub(crate) fn gradient_from_spectrum(grid: &Grid, coeffs: &[Complex64]) -> VectorField {
    VectorField::from_raw(
        (0..grid.dim())
            .map(|axis| ScalarField::from_spectrum(grid, derivative_spectrum(grid, coeffs, axis)))
            .collect(),
    )
}

/// Curl of component spectra (d = 3), returned as spectra.
pub(crate) fn curl_spectrum(grid: &Grid, comps: &[Vec<Complex64>]) -> [Vec<Complex64>; 3] {
    let mut out = [vec![ZERO; grid.len()], vec![ZERO; grid.len()], vec![ZERO; grid.len()]];
    for i in 0..grid.len() {
        let k = grid.k_odd(i);
        let (a, b, c) = (comps[0][i], comps[1][i], comps[2][i]);
        out[0][i] = I * (k[1] * c - k[2] * b);
        out[1][i] = I * (k[2] * a - k[0] * c);
        out[2][i] = I * (k[0] * b - k[1] * a);
    }
    out
}

/// Multiply by `|k|^σ`, dropping the mean for `σ != 0`.
pub(crate) fn fractional_spectrum(grid: &Grid, coeffs: &mut [Complex64], sigma: f64) {
    if sigma == 0.0 {
        return;
    }
    coeffs[0] = ZERO;
    let half = 0.5 * sigma;
    for (i, c) in coeffs.iter_mut().enumerate().skip(1) {
        *c *= grid.k2(i).powf(half);
    }
}

pub fn gradient(f: &ScalarField) -> VectorField {
    gradient_from_spectrum(f.grid(), &f.spectrum())
}

pub fn divergence(v: &VectorField) -> ScalarField {
    let grid = v.grid();
    let comps: Vec<_> = v.components().iter().map(ScalarField::spectrum).collect();
    ScalarField::from_spectrum(grid, divergence_spectrum(grid, &comps))
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    let grid = f.grid();
    let mut coeffs = f.spectrum();
    for (i, c) in coeffs.iter_mut().enumerate() {
        *c *= -grid.k2(i);
    }
    ScalarField::from_spectrum(grid, coeffs)
}

pub fn curl(v: &VectorField) -> Result<VectorField> {
    let grid = v.grid();
    if grid.dim() != 3 {
        return Err(Error::Dimension(format!("curl requires d = 3, got d = {}", grid.dim())));
    }
    let comps: Vec<_> = v.components().iter().map(ScalarField::spectrum).collect();
    let [a, b, c] = curl_spectrum(grid, &comps);
    Ok(VectorField::from_raw(vec![
        ScalarField::from_spectrum(grid, a),
        ScalarField::from_spectrum(grid, b),
        ScalarField::from_spectrum(grid, c),
    ]))
}

/// `Λ^σ = (−Δ)^{σ/2}`. For `σ < 0` the input must have zero mean.
pub fn fractional_op(f: &ScalarField, sigma: f64) -> Result<ScalarField> {
    let grid = f.grid();
    let mut coeffs = f.spectrum();
    if sigma < 0.0 {
        check_mean_zero(&coeffs)?;
    }
    fractional_spectrum(grid, &mut coeffs, sigma);
    Ok(ScalarField::from_spectrum(grid, coeffs))
}

/// `∇Λ⁻²f`. Its divergence is `−f` on mean-zero input.
pub fn inv_lap_gradient(f: &ScalarField) -> Result<VectorField> {
    let grid = f.grid();
    let mut coeffs = f.spectrum();
    check_mean_zero(&coeffs)?;
    fractional_spectrum(grid, &mut coeffs, -2.0);
    Ok(gradient_from_spectrum(grid, &coeffs))
}

/// `Λ⁻²∇×v` (d = 3). The curl is mean-free, so no precondition applies.
pub fn inv_lap_curl(v: &VectorField) -> Result<VectorField> {
    let grid = v.grid();
    if grid.dim() != 3 {
        return Err(Error::Dimension(format!("curl requires d = 3, got d = {}", grid.dim())));
    }
    let comps: Vec<_> = v.components().iter().map(ScalarField::spectrum).collect();
    let curl = curl_spectrum(grid, &comps);
    Ok(VectorField::from_raw(
        curl.into_iter()
            .map(|mut c| {
                fractional_spectrum(grid, &mut c, -2.0);
                ScalarField::from_spectrum(grid, c)
            })
            .collect(),
    ))
}

/// Apply the 2/3 rule to a scalar field.
pub fn dealias(f: &ScalarField) -> ScalarField {
    f.dealiased()
}
