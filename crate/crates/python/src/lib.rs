//! Python bindings. Fields cross the boundary as flat lists of nodal values.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use relaxlab::config::parse_config_str;
use relaxlab::euler::PressureLaw;
use relaxlab::harness::{fit_points, InitialLayer};
use relaxlab::limit::{solve_porous_medium, LimitParams};
use relaxlab::report::{json_string, run_experiment};
use relaxlab::spectral::{gradient, sobolev_norm, Grid, ScalarField, VectorField};

fn py_err(e: relaxlab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn field_1d(values: Vec<f64>, length: f64) -> PyResult<ScalarField> {
    let grid = Grid::new(1, values.len(), length).map_err(py_err)?;
    ScalarField::from_values(&grid, values).map_err(py_err)
}

/// Library version.
#[pyfunction]
pub fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

/// Spectral derivative of periodic samples on `[0, length)`.
#[pyfunction]
pub fn derivative_1d(values: Vec<f64>, length: f64) -> PyResult<Vec<f64>> {
    let f = field_1d(values, length)?;
    Ok(gradient(&f).components()[0].values().to_vec())
}

/// `‖f‖_{H^s}` of periodic samples on `[0, length)`.
#[pyfunction]
pub fn sobolev_norm_1d(values: Vec<f64>, length: f64, s: f64) -> PyResult<f64> {
    Ok(sobolev_norm(&field_1d(values, length)?, s))
}

/// Least-squares slope, intercept and log residual of `log values` against `log eps`.
#[pyfunction]
pub fn fit_rate(eps: Vec<f64>, values: Vec<f64>) -> PyResult<(f64, f64, f64)> {
    let f = fit_points("metric", &eps, &values).map_err(py_err)?;
    Ok((f.slope, f.intercept, f.residual))
}

/// `e^{−t/ε²}`, the decay factor of the initial layer.
#[pyfunction]
pub fn initial_layer_factor(eps: f64, t: f64) -> PyResult<f64> {
    let g = Grid::new(1, 8, 1.0).map_err(py_err)?;
    InitialLayer::new(VectorField::zeros(&g), eps)
        .and_then(|l| l.factor(t))
        .map_err(py_err)
}

/// Porous-medium solve `∂t ρ = Δ(a²ρ^γ)` in one dimension; returns the
/// density at each of `times`.
#[pyfunction]
#[pyo3(signature = (rho0, length, times, a = 1.0, gamma = 2.0))]
pub fn porous_medium_1d(rho0: Vec<f64>, length: f64, times: Vec<f64>, a: f64, gamma: f64) -> PyResult<Vec<Vec<f64>>> {
    let rho = field_1d(rho0, length)?;
    let law = PressureLaw::gamma_law(a, gamma).map_err(py_err)?;
    let t_final = times.last().copied().unwrap_or(0.0);
    let bundle = solve_porous_medium(&rho, &LimitParams::new(t_final), law, &times).map_err(py_err)?;
    Ok(bundle.rho.states.iter().map(|s| s.values().to_vec()).collect())
}

/// Parse a TOML configuration and return it with every default filled in.
#[pyfunction]
pub fn resolve_config(text: &str) -> PyResult<String> {
    parse_config_str(text).and_then(|c| c.to_toml()).map_err(py_err)
}

/// Run the ε-sweep of a TOML configuration; returns the JSON report.
#[pyfunction]
#[pyo3(signature = (text, threads = 1))]
pub fn run_sweep(text: &str, threads: usize) -> PyResult<String> {
    let cfg = parse_config_str(text).map_err(py_err)?;
    run_experiment(&cfg, threads).and_then(|r| json_string(&r)).map_err(py_err)
}

/// `(name, value, tolerance, pass)` for each built-in self-test.
#[pyfunction]
pub fn run_checks() -> Vec<(String, f64, f64, bool)> {
    relaxlab::check::run_checks()
        .into_iter()
        .map(|c| (c.name, c.value, c.tolerance, c.pass))
        .collect()
}

#[pymodule]
pub fn relaxlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(version, m)?)?;
    m.add_function(wrap_pyfunction!(derivative_1d, m)?)?;
    m.add_function(wrap_pyfunction!(sobolev_norm_1d, m)?)?;
    m.add_function(wrap_pyfunction!(fit_rate, m)?)?;
    m.add_function(wrap_pyfunction!(initial_layer_factor, m)?)?;
    m.add_function(wrap_pyfunction!(porous_medium_1d, m)?)?;
    m.add_function(wrap_pyfunction!(resolve_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(run_checks, m)?)?;
    Ok(())
}
