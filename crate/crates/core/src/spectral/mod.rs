//! Periodic-domain fields, Fourier-multiplier operators and Sobolev norms.

mod field;
mod grid;
mod norms;
pub mod ops;

pub use field::{ScalarField, VectorField};
pub use grid::Grid;
pub use norms::{gradient_sobolev_norm, hom_sobolev_norm, sobolev_norm, Normed};
pub use ops::{
    curl, dealias, divergence, fractional_op, gradient, inv_lap_curl, inv_lap_gradient, laplacian,
};

pub use rustfft::num_complex::Complex64;
