//! Configured families of initial data.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler::{EulerState, PressureLaw};
use crate::limit::darcy_flux;
use crate::spectral::{Grid, ScalarField, VectorField};

/// Shape of the density perturbation `ρ₀ − 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    /// `Σ cos(2π n·x / L)` over the listed integer modes.
    Cosine { modes: Vec<[i64; 3]> },
    /// Periodized Gaussian bump truncated to `|n_i| ≤ band`.
    Bump { width: f64, band: i64 },
    /// Seeded random combination of modes with `0 < max|n_i| ≤ band`.
    Random { seed: u64, band: i64 },
}

impl Default for Family {
    fn default() -> Self {
        Family::Cosine { modes: vec![[1, 0, 0]] }
    }
}

/// How the initial momentum relates to the equilibrium manifold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preparation {
    /// `q₀ = ρ₀u₀` with a mode-1 velocity unrelated to `−∇p(ρ₀)`.
    #[default]
    Ill,
    /// `q₀ = −∇p(ρ₀*)`, `ρ₀ = ρ₀*`.
    Well,
    /// `ρ₀ = ρ₀* + ερ₁,₀` with a mode-2 cosine `ρ₁,₀`, `q₀ = −∇p(ρ₀*)`.
    Expansion,
}

/// Size of the ill-prepared velocity in the rescaled variables.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocityScaling {
    /// `u₀ = v₀/ε`: an `O(1)` velocity of the unscaled system.
    #[default]
    InverseEps,
    /// `u₀ = v₀`.
    Unit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InitialDataFamily {
    pub family: Family,
    pub amplitude: f64,
    /// Amplitude of `v₀`; defaults to `amplitude` when absent.
    pub velocity_amplitude: Option<f64>,
    pub preparation: Preparation,
    pub velocity_scaling: VelocityScaling,
    /// Amplitude of `ρ₁,₀` for the expansion family; defaults to `amplitude`.
    pub corrector_amplitude: Option<f64>,
}

impl Default for InitialDataFamily {
    fn default() -> Self {
        Self {
            family: Family::default(),
            amplitude: 0.05,
            velocity_amplitude: None,
            preparation: Preparation::Ill,
            velocity_scaling: VelocityScaling::InverseEps,
            corrector_amplitude: None,
        }
    }
}

/// Initial data of one ε-run together with the matching limit data.
#[derive(Clone, Debug)]
pub struct InitialData {
    pub state: EulerState,
    pub rho_star: ScalarField,
    pub rho1: ScalarField,
}

impl InitialDataFamily {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(Error::Validation(format!("amplitude {} must be > 0", self.amplitude)));
        }
        match &self.family {
            Family::Cosine { modes } => {
                if modes.is_empty() || modes.contains(&[0, 0, 0]) {
                    return Err(Error::Validation("cosine family needs nonzero modes".into()));
                }
            }
            Family::Bump { width, band } => {
                if !(*width > 0.0) || *band < 1 {
                    return Err(Error::Validation("bump needs width > 0 and band >= 1".into()));
                }
            }
            Family::Random { band, seed } => {
                if *band < 1 {
                    return Err(Error::Validation("random family needs band >= 1".into()));
                }
                if *seed > i64::MAX as u64 {
                    return Err(Error::Validation(format!("seed must be at most {}", i64::MAX)));
                }
            }
        }
        Ok(())
    }

    /// `ρ₀* − 1`, normalized so that its largest nodal magnitude is `amplitude`.
    pub fn density_perturbation(&self, grid: &Grid) -> Result<ScalarField> {
        self.validate()?;
        let d = grid.dim();
        let k0 = grid.fundamental();
        let raw = match &self.family {
            Family::Cosine { modes } => {
                for m in modes {
                    if m[d..].iter().any(|&n| n != 0) || m.iter().any(|&n| 3 * n.abs() > grid.n() as i64) {
                        return Err(Error::Validation(format!("mode {m:?} not representable on {grid:?}")));
                    }
                }
                let modes = modes.clone();
                ScalarField::from_fn(grid, move |x| {
                    modes
                        .iter()
                        .map(|m| (k0 * (0..3).map(|a| m[a] as f64 * x[a]).sum::<f64>()).cos())
                        .sum()
                })
            }
            Family::Bump { width, band } => {
                let (w, l) = (*width, grid.length());
                let bump = ScalarField::from_fn(grid, move |x| {
                    let r2: f64 = (0..d)
                        .map(|a| {
                            let dx = (x[a] - 0.5 * l).abs();
                            dx * dx
                        })
                        .sum();
                    (-r2 / (2.0 * w * w)).exp()
                });
                let band = *band;
                let mut spec = bump.spectrum();
                for (i, c) in spec.iter_mut().enumerate() {
                    let n = grid.mode_indices(i);
                    if i == 0 || n.iter().any(|&v| v.abs() > band) {
                        *c = 0.0.into();
                    }
                }
                ScalarField::from_spectrum(grid, spec)
            }
            Family::Random { seed, band } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let b = *band;
                let range = |use_axis: bool| if use_axis { -b..=b } else { 0..=0 };
                let mut terms = Vec::new();
                for n1 in range(true) {
                    for n2 in range(d >= 2) {
                        for n3 in range(d >= 3) {
                            let n = [n1, n2, n3];
                            // one representative per ± pair
                            if n == [0, 0, 0] || n.iter().find(|&&v| v != 0).is_some_and(|&v| v < 0) {
                                continue;
                            }
                            let a: f64 = rng.random_range(-1.0..1.0);
                            let s: f64 = rng.random_range(-1.0..1.0);
                            terms.push((n, a, s));
                        }
                    }
                }
                ScalarField::from_fn(grid, move |x| {
                    terms
                        .iter()
                        .map(|(n, a, s)| {
                            let ph = k0 * (0..3).map(|i| n[i] as f64 * x[i]).sum::<f64>();
                            a * ph.cos() + s * ph.sin()
                        })
                        .sum()
                })
            }
        };
        let peak = raw.max_abs();
        if !(peak > 0.0) {
            return Err(Error::Validation("density perturbation vanishes on this grid".into()));
        }
        Ok(raw.scale(self.amplitude / peak))
    }

    /// Mode-1 velocity `v₀`: `cos(x₁)ê₁` in one dimension, and
    /// `(cos x_a + cos x_{a+1})/2` on component `a` otherwise, so the field
    /// has both divergence and curl. The cosine phase makes `v₀`
    /// L²-orthogonal to the Darcy flux of the cosine density family.
    pub fn base_velocity(&self, grid: &Grid) -> VectorField {
        let d = grid.dim();
        let amp = self.velocity_amplitude.unwrap_or(self.amplitude);
        let k0 = grid.fundamental();
        VectorField::from_fn(grid, move |x| {
            let mut v = [0.0; 3];
            if d == 1 {
                v[0] = amp * (k0 * x[0]).cos();
            } else {
                for (a, slot) in v.iter_mut().enumerate().take(d) {
                    let b = (a + 1) % d;
                    *slot = 0.5 * amp * ((k0 * x[a]).cos() + (k0 * x[b]).cos());
                }
            }
            v
        })
    }

    /// `ρ₁,₀ = δ₁ cos(2·2πx₁/L)` for the expansion family, zero otherwise.
    pub fn corrector_initial(&self, grid: &Grid) -> ScalarField {
        match self.preparation {
            Preparation::Expansion => {
                let amp = self.corrector_amplitude.unwrap_or(self.amplitude);
                let k0 = grid.fundamental();
                ScalarField::from_fn(grid, move |x| amp * (2.0 * k0 * x[0]).cos())
            }
            _ => ScalarField::zeros(grid),
        }
    }

    /// Initial density and momentum of the relaxation run at `eps`.
    pub fn build(&self, grid: &Grid, eps: f64, law: &PressureLaw) -> Result<InitialData> {
        let rho_star = self.density_perturbation(grid)?.shift(1.0);
        let rho1 = self.corrector_initial(grid);
        let (rho, q) = match self.preparation {
            Preparation::Ill => {
                let scale = match self.velocity_scaling {
                    VelocityScaling::InverseEps => 1.0 / eps,
                    VelocityScaling::Unit => 1.0,
                };
                let u = self.base_velocity(grid).scale(scale);
                (rho_star.clone(), u.mul_scalar(&rho_star))
            }
            Preparation::Well => (rho_star.clone(), darcy_flux(&rho_star, law)),
            Preparation::Expansion => (rho_star.axpy(eps, &rho1), darcy_flux(&rho_star, law)),
        };
        Ok(InitialData {
            state: EulerState::new(rho, q)?,
            rho_star,
            rho1,
        })
    }
}

/// `2π`, the default box side.
pub const TWO_PI: f64 = 2.0 * PI;
