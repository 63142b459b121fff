use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Periodic tensor-product grid on the torus `[0, L)^d`.
///
/// The grid owns the FFT plans and the per-mode wavenumber tables, so it is
/// cheap to clone and can be shared across threads.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    dim: usize,
    n: usize,
    length: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Signed integer mode index per axis position, in `[-N/2, N/2)`.
    modes: Vec<i64>,
    /// `|k|^2` per flat spectral index.
    k2: Vec<f64>,
    /// 2/3-rule mask per flat spectral index.
    keep: Vec<bool>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim())
            .field("n", &self.n())
            .field("length", &self.length())
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.dim() == other.dim()
                && self.n() == other.n()
                && self.length() == other.length())
    }
}

impl Grid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("side length must be positive, got {length}")));
        }

        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);

        let half = (n / 2) as i64;
        let modes: Vec<i64> = (0..n as i64)
            .map(|i| if i < half { i } else { i - n as i64 })
            .collect();
        let cutoff = (n / 3) as i64;
        let base = 2.0 * PI / length;

        let total = n.pow(dim as u32);
        let mut k2 = Vec::with_capacity(total);
        let mut keep = Vec::with_capacity(total);
        for flat in 0..total {
            let mut sum = 0.0;
            let mut inside = true;
            let mut rem = flat;
            for _ in 0..dim {
                let m = modes[rem % n];
                rem /= n;
                let k = base * m as f64;
                sum += k * k;
                inside &= m.abs() <= cutoff;
            }
            k2.push(sum);
            keep.push(inside);
        }

        Ok(Self {
            inner: Arc::new(GridInner {
                dim,
                n,
                length,
                forward,
                inverse,
                modes,
                k2,
                keep,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn length(&self) -> f64 {
        self.inner.length
    }

    /// Total number of nodes, `N^d`.
    pub fn len(&self) -> usize {
        self.inner.k2.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.inner.length / self.inner.n as f64
    }

    /// Torus volume `L^d`.
    pub fn volume(&self) -> f64 {
        self.inner.length.powi(self.inner.dim as i32)
    }

    /// Lowest nonzero wavenumber `2π/L`.
    pub fn fundamental(&self) -> f64 {
        2.0 * PI / self.inner.length
    }

    /// Per-axis node indices of a flat index. Axis `d-1` varies fastest.
    pub fn axis_indices(&self, flat: usize) -> [usize; 3] {
        let n = self.inner.n;
        let mut out = [0usize; 3];
        let mut rem = flat;
        for axis in (0..self.inner.dim).rev() {
            out[axis] = rem % n;
            rem /= n;
        }
        out
    }

    /// Physical coordinates of a node.
    pub fn coords(&self, flat: usize) -> [f64; 3] {
        let idx = self.axis_indices(flat);
        let dx = self.dx();
        let mut x = [0.0; 3];
        for axis in 0..self.inner.dim {
            x[axis] = idx[axis] as f64 * dx;
        }
        x
    }

    /// Signed mode index per axis for a flat spectral index.
    pub fn mode_indices(&self, flat: usize) -> [i64; 3] {
        let idx = self.axis_indices(flat);
        let mut out = [0i64; 3];
        for axis in 0..self.inner.dim {
            out[axis] = self.inner.modes[idx[axis]];
        }
        out
    }

    /// Wavenumber vector for a flat spectral index, with the Nyquist mode
    /// zeroed on each axis. This is the multiplier used by odd-order
    /// derivatives so that real fields stay real.
    pub fn k_odd(&self, flat: usize) -> [f64; 3] {
        let m = self.mode_indices(flat);
        let nyq = -((self.inner.n / 2) as i64);
        let base = self.fundamental();
        let mut k = [0.0; 3];
        for axis in 0..self.inner.dim {
            if m[axis] != nyq {
                k[axis] = base * m[axis] as f64;
            }
        }
        k
    }

    /// `|k|^2` for a flat spectral index (Nyquist included).
    pub fn k2(&self, flat: usize) -> f64 {
        self.inner.k2[flat]
    }

    pub fn k2_table(&self) -> &[f64] {
        &self.inner.k2
    }

    pub fn dealias_mask(&self) -> &[bool] {
        &self.inner.keep
    }

    /// Forward transform of real nodal values. Coefficients are normalized so
    /// that `f(x) = Σ f̂_k e^{ik·x}`.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(values.len(), self.len());
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, &self.inner.forward);
        let scale = 1.0 / self.len() as f64;
        for c in data.iter_mut() {
            *c *= scale;
        }
        data
    }

    /// Inverse transform; returns the real part.
    pub fn inverse(&self, mut coeffs: Vec<Complex64>) -> Vec<f64> {
        debug_assert_eq!(coeffs.len(), self.len());
        self.transform(&mut coeffs, &self.inner.inverse);
        coeffs.into_iter().map(|c| c.re).collect()
    }

    /// Zero every mode outside the 2/3-rule band.
    pub fn dealias(&self, coeffs: &mut [Complex64]) {
        for (c, &keep) in coeffs.iter_mut().zip(self.inner.keep.iter()) {
            if !keep {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.inner.n;
        let dim = self.inner.dim;
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // Contiguous last axis: every run of n values is one line.
        plan.process_with_scratch(data, &mut scratch);
        if dim == 1 {
            return;
        }
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..dim - 1 {
            let stride = n.pow((dim - 1 - axis) as u32);
            let block = stride * n;
            for start in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    for (j, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + j * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (j, value) in line.iter().enumerate() {
                        data[base + j * stride] = *value;
                    }
                }
            }
        }
    }
}
