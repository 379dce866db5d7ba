//! Python bindings: `import pymeanlab`.
//!
//! Reports come back as plain dicts (decoded from their JSON form).

use meanlab::{GridSpec, MeanExpr};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(pymeanlab, MeanError, PyValueError, "Error raised by meanlab.");
create_exception!(
    pymeanlab,
    NonConvergenceError,
    MeanError,
    "Gauss iteration hit its iteration cap."
);

fn to_py(err: meanlab::MeanError) -> PyErr {
    if err.is_non_convergence() {
        NonConvergenceError::new_err(err.to_string())
    } else {
        MeanError::new_err(err.to_string())
    }
}

fn to_dict<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| MeanError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// A parsed mean expression.
#[pyclass(name = "Mean", module = "pymeanlab", skip_from_py_object)]
#[derive(Clone)]
pub struct PyMean {
    inner: MeanExpr,
}

#[pymethods]
impl PyMean {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        meanlab::parse_mean(text)
            .map(|inner| PyMean { inner })
            .map_err(to_py)
    }

    #[staticmethod]
    fn gini(p: f64, q: f64) -> Self {
        PyMean {
            inner: MeanExpr::gini(p, q),
        }
    }

    #[staticmethod]
    fn power(p: f64) -> Self {
        PyMean {
            inner: MeanExpr::power(p),
        }
    }

    #[staticmethod]
    fn compose(outer: &PyMean, left: &PyMean, right: &PyMean) -> Self {
        PyMean {
            inner: MeanExpr::compose(outer.inner.clone(), left.inner.clone(), right.inner.clone()),
        }
    }

    #[staticmethod]
    fn invariant(left: &PyMean, right: &PyMean) -> Self {
        PyMean {
            inner: MeanExpr::invariant(left.inner.clone(), right.inner.clone()),
        }
    }

    /// `M(x, y)`.
    fn __call__(&self, x: f64, y: f64) -> PyResult<f64> {
        meanlab::eval(&self.inner, x, y).map_err(to_py)
    }

    fn eval(&self, x: f64, y: f64) -> PyResult<f64> {
        self.__call__(x, y)
    }

    /// `ln M(e^u, 1)`.
    fn eval_log(&self, u: f64) -> PyResult<f64> {
        meanlab::eval_log(&self.inner, u).map_err(to_py)
    }

    fn known_order(&self) -> Option<f64> {
        meanlab::known_order(&self.inner)
    }

    fn contains_envelope(&self) -> bool {
        self.inner.contains_envelope()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Mean('{}')", self.inner)
    }

    fn __eq__(&self, other: &PyMean) -> bool {
        self.inner == other.inner
    }
}

/// Sampling plan for order estimation.
#[pyclass(name = "Grid", module = "pymeanlab", skip_from_py_object)]
#[derive(Clone)]
pub struct PyGrid {
    inner: GridSpec,
}

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (u_start=-1.0, u_end=-1e4, points=4096, windows=8, probes=64))]
    fn new(u_start: f64, u_end: f64, points: usize, windows: usize, probes: usize) -> PyResult<Self> {
        let inner = GridSpec {
            u_start,
            u_end,
            points,
            windows,
            probes,
        };
        inner.validate().map_err(to_py)?;
        Ok(PyGrid { inner })
    }

    #[getter]
    fn u_start(&self) -> f64 {
        self.inner.u_start
    }

    #[getter]
    fn u_end(&self) -> f64 {
        self.inner.u_end
    }

    #[getter]
    fn points(&self) -> usize {
        self.inner.points
    }

    #[getter]
    fn windows(&self) -> usize {
        self.inner.windows
    }

    #[getter]
    fn probes(&self) -> usize {
        self.inner.probes
    }

    fn __repr__(&self) -> String {
        let g = &self.inner;
        format!(
            "Grid(u_start={}, u_end={}, points={}, windows={}, probes={})",
            g.u_start, g.u_end, g.points, g.windows, g.probes
        )
    }
}

fn grid_or_default(grid: Option<&PyGrid>) -> GridSpec {
    grid.map_or_else(GridSpec::default, |g| g.inner)
}

#[pyfunction]
fn parse_mean(text: &str) -> PyResult<PyMean> {
    PyMean::new(text)
}

/// Returns `(value, iterations, final_gap)`.
#[pyfunction]
#[pyo3(signature = (m, n, x, y, tol=1e-14, max_iter=200))]
fn gauss_iterate(
    m: &PyMean,
    n: &PyMean,
    x: f64,
    y: f64,
    tol: f64,
    max_iter: usize,
) -> PyResult<(f64, usize, f64)> {
    let r = meanlab::gauss_iterate(&m.inner, &n.inner, x, y, tol, max_iter).map_err(to_py)?;
    Ok((r.value, r.iterations, r.final_gap))
}

#[pyfunction]
#[pyo3(signature = (m, n, u, tol=1e-14, max_iter=200))]
fn gauss_iterate_log(m: &PyMean, n: &PyMean, u: f64, tol: f64, max_iter: usize) -> PyResult<f64> {
    meanlab::gauss_iterate_log(&m.inner, &n.inner, u, tol, max_iter).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (k, m, n, samples=256))]
fn invariance_residual(k: &PyMean, m: &PyMean, n: &PyMean, samples: usize) -> PyResult<f64> {
    meanlab::invariance_residual(&k.inner, &m.inner, &n.inner, samples).map_err(to_py)
}

/// `(u, phi(u))` samples over the grid and the phase-exact probes.
#[pyfunction]
#[pyo3(signature = (m, grid=None))]
fn sample_phi(m: &PyMean, grid: Option<&PyGrid>) -> PyResult<Vec<(f64, f64)>> {
    meanlab::sample_phi(&m.inner, &grid_or_default(grid)).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (m, grid=None))]
fn estimate_orders(py: Python<'_>, m: &PyMean, grid: Option<&PyGrid>) -> PyResult<Py<PyAny>> {
    let est = meanlab::estimate_orders(&m.inner, &grid_or_default(grid)).map_err(to_py)?;
    to_dict(py, &est)
}

#[pyfunction]
#[pyo3(signature = (m, grid=None))]
fn order_at_infinity(py: Python<'_>, m: &PyMean, grid: Option<&PyGrid>) -> PyResult<Py<PyAny>> {
    let est = meanlab::order_at_infinity(&m.inner, &grid_or_default(grid)).map_err(to_py)?;
    to_dict(py, &est)
}

#[pyfunction]
#[pyo3(signature = (m, grid=None, gpg_tol=0.05, const_tol=0.01))]
fn classify_power_growth(
    py: Python<'_>,
    m: &PyMean,
    grid: Option<&PyGrid>,
    gpg_tol: f64,
    const_tol: f64,
) -> PyResult<Py<PyAny>> {
    let r = meanlab::classify_power_growth(&m.inner, &grid_or_default(grid), gpg_tol, const_tol)
        .map_err(to_py)?;
    to_dict(py, &r)
}

#[pyfunction]
#[pyo3(signature = (m, n, grid=None, tol=0.02))]
fn verify_invariance_order(
    py: Python<'_>,
    m: &PyMean,
    n: &PyMean,
    grid: Option<&PyGrid>,
    tol: f64,
) -> PyResult<Py<PyAny>> {
    let r = meanlab::verify_invariance_order(&m.inner, &n.inner, &grid_or_default(grid), tol)
        .map_err(to_py)?;
    to_dict(py, &r)
}

#[pyfunction]
fn invariant_order_formula(ord_m: f64, ord_n: f64) -> PyResult<f64> {
    meanlab::invariant_order_formula(ord_m, ord_n).map_err(to_py)
}

#[pyfunction]
fn gini_order(p: f64, q: f64) -> f64 {
    meanlab::gini_order(p, q)
}

#[pyfunction]
fn pales_leq(p: f64, q: f64, r: f64, s: f64) -> bool {
    meanlab::pales_leq(p, q, r, s)
}

#[pyfunction]
fn dl_leq(p: f64, q: f64, r: f64, s: f64) -> bool {
    meanlab::dl_leq(p, q, r, s)
}

#[pymodule]
fn pymeanlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMean>()?;
    m.add_class::<PyGrid>()?;
    m.add("MeanError", m.py().get_type::<MeanError>())?;
    m.add("NonConvergenceError", m.py().get_type::<NonConvergenceError>())?;
    m.add_function(wrap_pyfunction!(parse_mean, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_iterate, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_iterate_log, m)?)?;
    m.add_function(wrap_pyfunction!(invariance_residual, m)?)?;
    m.add_function(wrap_pyfunction!(sample_phi, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_orders, m)?)?;
    m.add_function(wrap_pyfunction!(order_at_infinity, m)?)?;
    m.add_function(wrap_pyfunction!(classify_power_growth, m)?)?;
    m.add_function(wrap_pyfunction!(verify_invariance_order, m)?)?;
    m.add_function(wrap_pyfunction!(invariant_order_formula, m)?)?;
    m.add_function(wrap_pyfunction!(gini_order, m)?)?;
    m.add_function(wrap_pyfunction!(pales_leq, m)?)?;
    m.add_function(wrap_pyfunction!(dl_leq, m)?)?;
    Ok(())
}
