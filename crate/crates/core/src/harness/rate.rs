use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::ErrorTable;

/// Least-squares line `log e = slope·log ε + intercept`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub metric: String,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    pub points: usize,
}

/// Fit `values` against `eps`; needs at least three strictly positive points.
pub fn fit_points(metric: &str, eps: &[f64], values: &[f64]) -> Result<RateFit> {
    if eps.len() != values.len() {
        return Err(Error::InvalidParameter(format!(
            "{} eps values but {} metric values",
            eps.len(),
            values.len()
        )));
    }
    if eps.len() < 3 {
        return Err(Error::InsufficientPoints { needed: 3, got: eps.len() });
    }
    for (&e, &v) in eps.iter().zip(values) {
        if !(e > 0.0) {
            return Err(Error::InvalidParameter(format!("eps = {e} must be > 0")));
        }
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::NonPositiveMetric { metric: metric.to_string(), eps: e, value: v });
        }
    }
    let x: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidParameter("eps values must not all coincide".into()));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x.iter().zip(&y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    Ok(RateFit {
        metric: metric.to_string(),
        slope,
        intercept,
        residual: (ss / n).sqrt(),
        points: x.len(),
    })
}

/// Fit one metric column of an error table.
pub fn fit_rate(table: &ErrorTable, metric: &str) -> Result<RateFit> {
    let mut eps = Vec::new();
    let mut vals = Vec::new();
    for row in &table.rows {
        if let Some(v) = row.metrics.get(metric) {
            eps.push(row.eps);
            vals.push(v.value);
        }
    }
    fit_points(metric, &eps, &vals)
}
