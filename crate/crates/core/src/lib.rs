//! Pseudospectral laboratory for diffusive relaxation limits of the damped
//! compressible Euler and Euler–Maxwell systems on periodic boxes.

// `!(x > 0.0)` is used throughout so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod config;
pub mod data;
pub mod error;
pub mod euler;
pub mod harness;
pub mod limit;
pub mod maxwell;
pub mod report;
pub(crate) mod fluid;
pub(crate) mod semi_implicit;
pub mod spectral;
pub mod stepping;

pub use error::{Error, Result};
