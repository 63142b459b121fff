use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::ScalarField;

/// Barotropic pressure law `p(ρ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PressureLaw {
    /// `p(ρ) = a² ρ^γ`; the limit is the porous medium equation.
    Gamma { a: f64, gamma: f64 },
}

impl Default for PressureLaw {
    fn default() -> Self {
        PressureLaw::Gamma { a: 1.0, gamma: 2.0 }
    }
}

impl PressureLaw {
    pub fn gamma_law(a: f64, gamma: f64) -> Result<Self> {
        let law = PressureLaw::Gamma { a, gamma };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PressureLaw::Gamma { a, gamma } => {
                if !(a.is_finite() && a > 0.0) {
                    return Err(Error::InvalidParameter(format!("pressure coefficient a = {a} must be > 0")));
                }
                if !(gamma.is_finite() && gamma > 1.0) {
                    return Err(Error::InvalidParameter(format!("adiabatic exponent {gamma} must be > 1")));
                }
                Ok(())
            }
        }
    }

    pub fn p(&self, rho: f64) -> f64 {
        match *self {
            PressureLaw::Gamma { a, gamma } => a * a * rho.powf(gamma),
        }
    }

    pub fn dp(&self, rho: f64) -> f64 {
        match *self {
            PressureLaw::Gamma { a, gamma } => a * a * gamma * rho.powf(gamma - 1.0),
        }
    }

    /// `p'(1)`, the linear diffusivity of the limit equation at equilibrium.
    pub fn dp_at_equilibrium(&self) -> f64 {
        self.dp(1.0)
    }

    pub fn pressure(&self, rho: &ScalarField) -> ScalarField {
        rho.map(|r| self.p(r))
    }

    pub fn pressure_derivative(&self, rho: &ScalarField) -> ScalarField {
        rho.map(|r| self.dp(r))
    }

    /// Largest `p'` over densities up to `rho_max` (p' is monotone for γ > 1).
    pub fn max_dp(&self, rho_max: f64) -> f64 {
        self.dp(rho_max.max(1.0))
    }
}
