//! Python bindings. Reports come back as plain dicts in the same shape as the
//! CLI's JSON output.

use num_rational::BigRational;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde_json::Value as Json;

use spherical_green_core::axial;
use spherical_green_core::geodesic::chord_expansion_check;
use spherical_green_core::green::{self, Acceleration, GreenSpec, SeriesConfig};
use spherical_green_core::hypersurface::{sample_points, surface_suite};
use spherical_green_core::mass::{decay_fit, fit_reports};
use spherical_green_core::report::reports_document;
use spherical_green_core::rigidity::series_rigidity_solve;
use spherical_green_core::spectrum::{self, OperatorOrder};
use spherical_green_core::surface::GraphSurface;
use spherical_green_core::Error;

fn err(e: Error) -> PyErr {
    if e.is_numerical() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn to_py<'py>(py: Python<'py>, v: &Json) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

fn spec(n: u32, sigma: Option<f64>) -> PyResult<GreenSpec> {
    match sigma {
        Some(s) => GreenSpec::power(n, s),
        None => GreenSpec::critical(n),
    }
    .map_err(err)
}

fn surface(doc: &str) -> PyResult<GraphSurface> {
    GraphSurface::from_json_str(doc).map_err(err)
}

#[pyfunction]
fn const_critical(n: u32) -> f64 {
    green::const_critical(n)
}

#[pyfunction]
fn const_power(n: u32, sigma: f64) -> PyResult<f64> {
    green::const_power(n, sigma).map_err(err)
}

/// Kernel status of the integer-order operator P_{2k} on S^n.
#[pyfunction]
fn kernel_status(n: u32, k: u32) -> PyResult<String> {
    let s = spectrum::kernel_status(n, OperatorOrder::Integer { k }).map_err(err)?;
    Ok(format!("{s:?}"))
}

/// Closed form at x = -P.Q; the critical case (sigma=None) uses additive constant 0.
#[pyfunction]
#[pyo3(signature = (n, x, sigma=None))]
fn green_closed(n: u32, x: f64, sigma: Option<f64>) -> PyResult<f64> {
    green::green_closed_x(&spec(n, sigma)?, x).map_err(err)
}

/// Accelerated partial sum; returns (value, error estimate).
#[pyfunction]
#[pyo3(signature = (n, x, sigma=None, terms=4000, acceleration="cesaro"))]
fn series_partial(n: u32, x: f64, sigma: Option<f64>, terms: usize, acceleration: &str) -> PyResult<(f64, f64)> {
    let acceleration = match acceleration {
        "none" => Acceleration::None,
        "cesaro" => Acceleration::CesaroAveraging,
        "euler" => Acceleration::EulerTransform,
        other => return Err(PyValueError::new_err(format!("unknown acceleration {other:?}"))),
    };
    let cfg = SeriesConfig { max_terms: terms, acceleration, ..SeriesConfig::default() };
    let v = green::series_partial(&spec(n, sigma)?, x, &cfg).map_err(err)?;
    Ok((v.value, v.error_estimate))
}

#[pyfunction]
#[pyo3(signature = (n, k, sigma=None))]
fn coefficient_match<'py>(py: Python<'py>, n: u32, k: u32, sigma: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    let r = green::coefficient_match(&spec(n, sigma)?, k).map_err(err)?;
    to_py(py, &serde_json::to_value(&r).map_err(|e| PyRuntimeError::new_err(e.to_string()))?)
}

/// Exact eigenvalue of the axial operator on u_k as (computed, expected) "p/q" strings.
#[pyfunction]
fn verify_eigenvalue(n: u32, k: u32) -> PyResult<(String, String)> {
    let (a, b) = axial::verify_eigenvalue(n, k).map_err(err)?;
    Ok((a.to_string(), b.to_string()))
}

#[pyfunction]
fn verify_orthogonality(n: u32, k: u32, l: u32) -> PyResult<String> {
    Ok(axial::verify_orthogonality(n, k, l).map_err(err)?.to_string())
}

#[pyfunction]
fn flat_radial_identity_is_zero(n: u32) -> PyResult<bool> {
    Ok(axial::flat_radial_identity(n).map_err(err)?.is_zero())
}

/// Series coefficients a_1..a_N as strings, "p/q" or "p/q + r/s*sqrt(d)".
#[pyfunction]
fn series_rigidity(c0: &str, n: usize) -> PyResult<Vec<String>> {
    let c0: BigRational = c0
        .trim()
        .parse()
        .map_err(|e| PyValueError::new_err(format!("cannot parse {c0:?} as p/q: {e}")))?;
    Ok(series_rigidity_solve(&c0, n).map_err(err)?.iter().map(|s| s.to_string()).collect())
}

#[pyfunction]
#[pyo3(signature = (surface_json, points=100, radius=None, seed=7))]
fn surface_reports<'py>(
    py: Python<'py>,
    surface_json: &str,
    points: usize,
    radius: Option<f64>,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let s = surface(surface_json)?;
    let r = radius.unwrap_or(0.5 * s.radius().min(2.0));
    let pts = sample_points(&s, r, points, seed);
    let reports = surface_suite(&s, &pts, None).map_err(err)?;
    to_py(py, &reports_document("surface", &reports, None))
}

#[pyfunction]
#[pyo3(signature = (surface_json, radii, order=32))]
fn mass_decay<'py>(py: Python<'py>, surface_json: &str, radii: Vec<f64>, order: usize) -> PyResult<Bound<'py, PyAny>> {
    let s = surface(surface_json)?;
    let fit = decay_fit(&s, &radii, order).map_err(err)?;
    let extra = serde_json::json!({
        "exponent": fit.exponent,
        "predicted_exponent": fit.predicted_exponent,
        "extrapolated_mass": fit.extrapolated_mass,
    });
    to_py(py, &reports_document("mass", &fit_reports(&s, &fit), Some(extra)))
}

#[pyfunction]
#[pyo3(signature = (surface_json, v, tol=1e-4))]
fn chord_expansion<'py>(py: Python<'py>, surface_json: &str, v: Vec<f64>, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let s = surface(surface_json)?;
    let r = chord_expansion_check(&s, &v, tol).map_err(err)?;
    to_py(py, &reports_document("geodesic", &[r], None))
}

#[pymodule]
fn spherical_green(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(const_critical, m)?)?;
    m.add_function(wrap_pyfunction!(const_power, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_status, m)?)?;
    m.add_function(wrap_pyfunction!(green_closed, m)?)?;
    m.add_function(wrap_pyfunction!(series_partial, m)?)?;
    m.add_function(wrap_pyfunction!(coefficient_match, m)?)?;
    m.add_function(wrap_pyfunction!(verify_eigenvalue, m)?)?;
    m.add_function(wrap_pyfunction!(verify_orthogonality, m)?)?;
    m.add_function(wrap_pyfunction!(flat_radial_identity_is_zero, m)?)?;
    m.add_function(wrap_pyfunction!(series_rigidity, m)?)?;
    m.add_function(wrap_pyfunction!(surface_reports, m)?)?;
    m.add_function(wrap_pyfunction!(mass_decay, m)?)?;
    m.add_function(wrap_pyfunction!(chord_expansion, m)?)?;
    Ok(())
}
