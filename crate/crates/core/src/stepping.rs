//! Time-stepping plumbing shared by every solver: the IMEX tableau, a
//! stepper trait that lands exactly on requested sample times, and sampled
//! trajectories.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time discretization of the stiff/non-stiff splitting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Forward Euler on the non-stiff part, backward Euler on the stiff part.
    ImexEuler,
    /// Ascher–Ruuth–Spiteri (2,2,2): second order, stiffly accurate.
    #[default]
    Ars222,
}

/// Diagonal coefficient of ARS(2,2,2), `1 − 1/√2`.
pub(crate) const ARS_GAMMA: f64 = 0.292_893_218_813_452_4;
/// First explicit weight of the last ARS(2,2,2) stage, `1 − 1/(2γ) = −1/√2`.
pub(crate) const ARS_DELTA: f64 = -0.707_106_781_186_547_5;

/// Something that advances in time by caller-chosen increments.
pub trait TimeStepper {
    fn time(&self) -> f64;

    /// Largest step the stepper wants to take.
    fn nominal_dt(&self) -> f64;

    /// Advance by exactly `h` (which may be smaller than the nominal step).
    fn step(&mut self, h: f64) -> Result<()>;

    /// Advance to `target`, shortening the final step to land on it.
    fn advance_to(&mut self, target: f64) -> Result<usize> {
        let mut steps = 0;
        let dt = self.nominal_dt();
        loop {
            let remaining = target - self.time();
            if remaining <= 1e-13 * target.abs().max(1.0) {
                return Ok(steps);
            }
            let h = if remaining <= dt * (1.0 + 1e-9) { remaining } else { dt };
            self.step(h)?;
            steps += 1;
        }
    }
}

/// States recorded at increasing sample times.
#[derive(Clone, Debug)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
}

impl<S> Default for Trajectory<S> {
    fn default() -> Self {
        Self {
            times: Vec::new(),
            states: Vec::new(),
        }
    }
}

impl<S: Clone> Trajectory<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: f64, state: S) {
        self.times.push(t);
        self.states.push(state);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn first(&self) -> Option<&S> {
        self.states.first()
    }

    pub fn last(&self) -> Option<&S> {
        self.states.last()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &S)> {
        self.times.iter().copied().zip(self.states.iter())
    }

    /// Index of the sample at time `t`, if present.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let tol = 1e-12 * t.abs().max(1.0);
        let pos = self.times.partition_point(|&s| s < t - tol);
        (pos < self.times.len() && (self.times[pos] - t).abs() <= tol).then_some(pos)
    }

    /// Sub-trajectory at exactly the given times.
    pub fn restrict_to(&self, times: &[f64]) -> Result<Self> {
        let mut out = Self::new();
        for &t in times {
            let i = self
                .index_of(t)
                .ok_or_else(|| Error::Alignment(format!("no sample at t = {t}")))?;
            out.push(self.times[i], self.states[i].clone());
        }
        Ok(out)
    }
}

/// Check two sample grids agree.
pub fn check_aligned(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Alignment(format!("{} vs {} samples", a.len(), b.len())));
    }
    for (i, (x, y)) in a.iter().zip(b.iter()).enumerate() {
        if (x - y).abs() > 1e-12 * x.abs().max(1.0) {
            return Err(Error::Alignment(format!("sample {i}: t = {x} vs t = {y}")));
        }
    }
    Ok(())
}

/// Validate and normalize requested sample times: non-negative, strictly
/// increasing.
pub fn validate_sample_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidParameter("no sample times requested".into()));
    }
    for &t in times {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        if !t.is_finite() {
            return Err(Error::InvalidParameter(format!("sample time {t} is not finite")));
        }
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("sample times must be strictly increasing".into()));
    }
    Ok(())
}

/// `count` uniform samples on `[0, t_final]` (both ends included).
pub fn uniform_times(t_final: f64, count: usize) -> Vec<f64> {
    let count = count.max(2);
    (0..count)
        .map(|i| t_final * i as f64 / (count - 1) as f64)
        .collect()
}

/// Uniform samples plus a cluster resolving the `O(eps²)` initial layer, so
/// trapezoid time integrals see the transient `e^{-t/eps²}`.
pub fn layer_resolving_times(t_final: f64, uniform: usize, eps: f64, layer_points: usize) -> Vec<f64> {
    let mut times = uniform_times(t_final, uniform);
    let tau = eps * eps;
    let first_uniform = times[1];
    let mut layer = Vec::new();
    // linear cluster on [0, 2 tau], then geometric growth to the uniform spacing
    let linear = layer_points.max(4);
    for j in 1..=linear {
        layer.push(2.0 * tau * j as f64 / linear as f64);
    }
    let mut t = 2.0 * tau;
    while t * 1.25 < first_uniform {
        t *= 1.25;
        layer.push(t);
    }
    times.extend(layer.into_iter().filter(|&t| t < first_uniform && t < t_final));
    merge_times(&mut times);
    times
}

/// Sort and drop near-duplicates.
pub fn merge_times(times: &mut Vec<f64>) {
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite sample times"));
    times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
}

/// Run `stepper` through `times`, recording `record()` at each one.
pub(crate) fn sample_run<T: TimeStepper, S>(
    stepper: &mut T,
    times: &[f64],
    mut record: impl FnMut(&T) -> Result<S>,
) -> Result<(Vec<S>, usize)> {
    validate_sample_times(times)?;
    let mut out = Vec::with_capacity(times.len());
    let mut steps = 0;
    for &t in times {
        steps += stepper.advance_to(t)?;
        out.push(record(stepper)?);
    }
    Ok((out, steps))
}

/// Composite trapezoid rule on a non-uniform grid.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}
