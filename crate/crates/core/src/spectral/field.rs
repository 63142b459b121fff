use rustfft::num_complex::Complex64;

use super::Grid;
use crate::error::{Error, Result};

/// Real nodal values over a [`Grid`].
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

/// A `d`-component vector field; one [`ScalarField`] per axis.
#[derive(Clone, Debug)]
pub struct VectorField {
    components: Vec<ScalarField>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![value; grid.len()],
        }
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "expected {} nodal values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("field values must be finite".into()));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    /// Sample `f(x)` at every node.
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.coords(i))).collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    /// Build from spectral coefficients (normalized as in [`Grid::forward`]).
    pub fn from_spectrum(grid: &Grid, coeffs: Vec<Complex64>) -> Self {
        Self {
            grid: grid.clone(),
            values: grid.inverse(coeffs),
        }
    }

    pub(crate) fn from_raw(grid: &Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        self.grid.forward(&self.values)
    }

    /// Copy with all modes outside the 2/3 band removed.
    pub fn dealiased(&self) -> Self {
        let mut coeffs = self.spectrum();
        self.grid.dealias(&mut coeffs);
        Self::from_spectrum(&self.grid, coeffs)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Root mean square of the nodal values.
    pub fn rms(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert!(self.grid == other.grid);
        Self::from_raw(
            &self.grid,
            self.values
                .iter()
                .zip(other.values.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    pub fn shift(&self, s: f64) -> Self {
        self.map(|v| v + s)
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + s * b)
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

impl VectorField {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            components: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    pub fn constant(grid: &Grid, value: &[f64]) -> Result<Self> {
        if value.len() != grid.dim() {
            return Err(Error::Dimension(format!(
                "constant vector has {} components on a {}-d grid",
                value.len(),
                grid.dim()
            )));
        }
        Ok(Self {
            components: value.iter().map(|&v| ScalarField::constant(grid, v)).collect(),
        })
    }

    pub fn from_components(components: Vec<ScalarField>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::Dimension("vector field needs components".into()));
        };
        if components.len() != first.grid().dim() {
            return Err(Error::Dimension(format!(
                "{} components on a {}-d grid",
                components.len(),
                first.grid().dim()
            )));
        }
        for c in &components[1..] {
            first.check_same_grid(c)?;
        }
        Ok(Self { components })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let nodal: Vec<[f64; 3]> = (0..grid.len()).map(|i| f(grid.coords(i))).collect();
        Self {
            components: (0..grid.dim())
                .map(|a| ScalarField::from_raw(grid, nodal.iter().map(|v| v[a]).collect()))
                .collect(),
        }
    }

    pub(crate) fn from_raw(components: Vec<ScalarField>) -> Self {
        Self { components }
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn component(&self, axis: usize) -> &ScalarField {
        &self.components[axis]
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.components
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(ScalarField::is_finite)
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0f64, |m, c| m.max(c.max_abs()))
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let grid = self.grid();
        let values = (0..grid.len())
            .map(|i| {
                self.components
                    .iter()
                    .map(|c| c.values()[i] * c.values()[i])
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        ScalarField::from_raw(grid, values)
    }

    pub fn map_components(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self {
            components: self.components.iter().map(f).collect(),
        }
    }

    pub fn zip_components(
        &self,
        other: &Self,
        f: impl Fn(&ScalarField, &ScalarField) -> ScalarField,
    ) -> Self {
        Self {
            components: self
                .components
                .iter()
                .zip(other.components.iter())
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_components(other, ScalarField::add)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_components(other, ScalarField::sub)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_components(|c| c.scale(s))
    }

    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        self.zip_components(other, |a, b| a.axpy(s, b))
    }

    /// Multiply every component by a scalar field.
    pub fn mul_scalar(&self, f: &ScalarField) -> Self {
        self.map_components(|c| c.mul(f))
    }

    pub fn dealiased(&self) -> Self {
        self.map_components(ScalarField::dealiased)
    }

    /// Pointwise cross product (d = 3 only).
    pub fn cross(&self, other: &Self) -> Result<Self> {
        if self.dim() != 3 || other.dim() != 3 {
            return Err(Error::Dimension("cross product requires d = 3".into()));
        }
        let [a1, a2, a3] = [&self.components[0], &self.components[1], &self.components[2]];
        let [b1, b2, b3] = [&other.components[0], &other.components[1], &other.components[2]];
        let c1 = a2.mul(b3).sub(&a3.mul(b2));
        let c2 = a3.mul(b1).sub(&a1.mul(b3));
        let c3 = a1.mul(b2).sub(&a2.mul(b1));
        Ok(Self {
            components: vec![c1, c2, c3],
        })
    }
}
