//! IMEX stepping for scalar parabolic problems `∂t y = L y + N(t, y)` where
//! `L` is a Fourier multiplier (diagonal, non-positive) treated implicitly
//! and `N` is evaluated explicitly in spectral form.

use crate::error::Result;
use crate::spectral::{Complex64, Grid, ScalarField};
use crate::stepping::{Scheme, TimeStepper, ARS_DELTA, ARS_GAMMA};

pub(crate) trait SplitRhs {
    /// Implicit multiplier as a function of `|k|²` and the zero-mode flag.
    fn linear(&self, k2: f64) -> f64;

    /// Explicit tendency spectrum, already dealiased.
    fn explicit(&mut self, t: f64, y: &ScalarField) -> Result<Vec<Complex64>>;

    /// Post-step hook for admissibility checks.
    fn after_step(&mut self, _t: f64, _y: &ScalarField) -> Result<()> {
        Ok(())
    }
}

pub(crate) struct DiagonalImex<R> {
    pub rhs: R,
    y: ScalarField,
    time: f64,
    dt: f64,
    scheme: Scheme,
    lin: Vec<f64>,
    pub steps: usize,
}

impl<R: SplitRhs> DiagonalImex<R> {
    pub fn new(rhs: R, y0: ScalarField, dt: f64, scheme: Scheme) -> Self {
        let lin = y0.grid().k2_table().iter().map(|&k2| rhs.linear(k2)).collect();
        Self {
            rhs,
            y: y0,
            time: 0.0,
            dt,
            scheme,
            lin,
            steps: 0,
        }
    }

    pub fn state(&self) -> &ScalarField {
        &self.y
    }

    fn solve(&self, grid: &Grid, rhs: Vec<Complex64>, h: f64) -> (Vec<Complex64>, ScalarField) {
        let spec: Vec<Complex64> = rhs
            .into_iter()
            .zip(self.lin.iter())
            .map(|(r, &l)| r / (1.0 - h * l))
            .collect();
        let field = ScalarField::from_spectrum(grid, spec.clone());
        (spec, field)
    }
}

impl<R: SplitRhs> TimeStepper for DiagonalImex<R> {
    fn time(&self) -> f64 {
        self.time
    }

    fn nominal_dt(&self) -> f64 {
        self.dt
    }

    fn step(&mut self, h: f64) -> Result<()> {
        let grid = self.y.grid().clone();
        let y_hat = self.y.spectrum();
        let t = self.time;
        let k1 = self.rhs.explicit(t, &self.y)?;
        let next = match self.scheme {
            Scheme::ImexEuler => {
                let rhs = y_hat.iter().zip(&k1).map(|(y, k)| y + h * k).collect();
                self.solve(&grid, rhs, h).1
            }
            Scheme::Ars222 => {
                let hg = h * ARS_GAMMA;
                let rhs2 = y_hat.iter().zip(&k1).map(|(y, k)| y + hg * k).collect();
                let (y2_hat, y2) = self.solve(&grid, rhs2, hg);
                let k2 = self.rhs.explicit(t + hg, &y2)?;
                let rhs3 = (0..grid.len())
                    .map(|i| {
                        y_hat[i]
                            + h * (ARS_DELTA * k1[i] + (1.0 - ARS_DELTA) * k2[i])
                            + h * (1.0 - ARS_GAMMA) * self.lin[i] * y2_hat[i]
                    })
                    .collect();
                self.solve(&grid, rhs3, hg).1
            }
        };
        self.time = t + h;
        self.y = next;
        self.steps += 1;
        self.rhs.after_step(self.time, &self.y)
    }
}

/// Linear-in-time interpolation through stored samples.
pub(crate) struct SampleInterpolator<'a> {
    times: &'a [f64],
    states: &'a [ScalarField],
}

impl<'a> SampleInterpolator<'a> {
    pub fn new(times: &'a [f64], states: &'a [ScalarField]) -> Self {
        Self { times, states }
    }

    pub fn at(&self, t: f64) -> ScalarField {
        let n = self.times.len();
        let j = self.times.partition_point(|&s| s <= t);
        if j == 0 {
            return self.states[0].clone();
        }
        if j >= n {
            return self.states[n - 1].clone();
        }
        let (t0, t1) = (self.times[j - 1], self.times[j]);
        let w = (t - t0) / (t1 - t0);
        if w <= 1e-14 {
            return self.states[j - 1].clone();
        }
        self.states[j - 1].scale(1.0 - w).axpy(w, &self.states[j])
    }
}

/// Largest gap between consecutive samples.
pub(crate) fn max_gap(times: &[f64]) -> f64 {
    times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}
