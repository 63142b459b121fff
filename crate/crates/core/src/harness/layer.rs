use crate::error::{Error, Result};
use crate::spectral::{sobolev_norm, VectorField};

/// `q_I(t) = e^{−t/ε²} q₀`, the transient that relaxes the initial momentum
/// onto the equilibrium manifold.
#[derive(Clone, Debug)]
pub struct InitialLayer {
    q0: VectorField,
    eps: f64,
}

impl InitialLayer {
    pub fn new(q0: VectorField, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps = {eps} must be > 0")));
        }
        Ok(Self { q0, eps })
    }

    /// A layer that vanishes identically.
    pub fn zero(like: &VectorField, eps: f64) -> Result<Self> {
        Self::new(VectorField::zeros(like.grid()), eps)
    }

    pub fn q0(&self) -> &VectorField {
        &self.q0
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `e^{−t/ε²}`.
    pub fn factor(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::NegativeTime(t));
        }
        Ok((-t / (self.eps * self.eps)).exp())
    }

    pub fn eval(&self, t: f64) -> Result<VectorField> {
        let f = self.factor(t)?;
        Ok(if f == 1.0 { self.q0.clone() } else { self.q0.scale(f) })
    }

    /// `∫₀^∞ ‖q_I‖_{L²} dt = ε²‖q₀‖_{L²}`.
    pub fn l2_time_integral(&self) -> f64 {
        self.eps * self.eps * sobolev_norm(&self.q0, 0.0)
    }
}
