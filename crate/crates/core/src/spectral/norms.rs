use rustfft::num_complex::Complex64;

use super::ops::check_mean_zero;
use super::{Grid, ScalarField, VectorField};
use crate::error::Result;

/// Anything whose Sobolev norm can be taken: one spectrum per component.
pub trait Normed {
    fn grid(&self) -> &Grid;
    fn component_spectra(&self) -> Vec<Vec<Complex64>>;
}

impl Normed for ScalarField {
    fn grid(&self) -> &Grid {
        ScalarField::grid(self)
    }

    fn component_spectra(&self) -> Vec<Vec<Complex64>> {
        vec![self.spectrum()]
    }
}

impl Normed for VectorField {
    fn grid(&self) -> &Grid {
        VectorField::grid(self)
    }

    fn component_spectra(&self) -> Vec<Vec<Complex64>> {
        self.components().iter().map(ScalarField::spectrum).collect()
    }
}

/// `‖f‖_{H^s} = (L^d Σ_k (1+|k|²)^s |f̂_k|²)^{1/2}`.
///
/// With the coefficient normalization of [`Grid::forward`], `s = 0` gives the
/// continuum `L²` norm on the torus.
pub fn sobolev_norm<F: Normed + ?Sized>(f: &F, s: f64) -> f64 {
    let grid = f.grid();
    sobolev_norm_sq_spectra(grid, &f.component_spectra(), s).sqrt()
}

/// `‖f‖_{Ḣ^s} = (L^d Σ_{k≠0} |k|^{2s} |f̂_k|²)^{1/2}`; zero mode excluded.
///
/// Negative `s` requires mean-zero input.
pub fn hom_sobolev_norm<F: Normed + ?Sized>(f: &F, s: f64) -> Result<f64> {
    let grid = f.grid();
    let spectra = f.component_spectra();
    if s < 0.0 {
        for c in &spectra {
            check_mean_zero(c)?;
        }
    }
    Ok(hom_sobolev_norm_sq_spectra(grid, &spectra, s).sqrt())
}

pub(crate) fn sobolev_norm_sq_spectra(grid: &Grid, spectra: &[Vec<Complex64>], s: f64) -> f64 {
    let k2 = grid.k2_table();
    let mut acc = 0.0;
    for coeffs in spectra {
        for (c, &k) in coeffs.iter().zip(k2.iter()) {
            acc += weight(1.0 + k, s) * c.norm_sqr();
        }
    }
    grid.volume() * acc
}

pub(crate) fn hom_sobolev_norm_sq_spectra(grid: &Grid, spectra: &[Vec<Complex64>], s: f64) -> f64 {
    let k2 = grid.k2_table();
    let mut acc = 0.0;
    for coeffs in spectra {
        for (c, &k) in coeffs.iter().zip(k2.iter()).skip(1) {
            acc += weight(k, s) * c.norm_sqr();
        }
    }
    grid.volume() * acc
}

#[inline]
fn weight(base: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else if s.fract() == 0.0 && s.abs() <= 16.0 {
        base.powi(s as i32)
    } else {
        base.powf(s)
    }
}

/// `‖∇f‖_{H^s}`, computed directly from the spectrum of `f`.
pub fn gradient_sobolev_norm(f: &ScalarField, s: f64) -> f64 {
    let grid = f.grid();
    let k2 = grid.k2_table();
    let coeffs = f.spectrum();
    let mut acc = 0.0;
    for (i, c) in coeffs.iter().enumerate() {
        let k = grid.k_odd(i);
        let kk: f64 = k.iter().map(|v| v * v).sum();
        acc += weight(1.0 + k2[i], s) * kk * c.norm_sqr();
    }
    (grid.volume() * acc).sqrt()
}
