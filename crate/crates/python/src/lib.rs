//! Python module `ipmagnus`.
//!
//! Matrices cross the boundary as `complex128` numpy arrays of shape `(N, N)`.

// Python keyword signatures mirror the CLI keys.
#![allow(clippy::too_many_arguments)]

use std::sync::Arc;

use ipmagnus::discretize::{Frame, InteractionOracle, PotentialSpec};
use ipmagnus::harness::{
    fit_loglog_slope, run_comm_scaling, run_global_error, run_local_error, run_verification_suite,
    Bracketing, CommScalingConfig, GlobalErrorConfig, LocalErrorConfig, ResultRow, RunOptions,
};
use ipmagnus::linalg::{spectral_norm as dense_spectral_norm, ComplexMatrix};
use ipmagnus::magnus::{self, MagnusStepConfig, OmegaOptions, SimplexScheme};
use num_complex::Complex64;
use numpy::{PyArray1, PyArray2, PyArrayMethods, PyReadonlyArray2, PyUntypedArrayMethods};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: ipmagnus::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_numpy<'py>(py: Python<'py>, m: &ComplexMatrix) -> PyResult<Bound<'py, PyArray2<Complex64>>> {
    let n = m.dim();
    PyArray1::from_slice(py, m.as_slice()).reshape([n, n])
}

fn from_numpy(a: &PyReadonlyArray2<'_, Complex64>) -> PyResult<ComplexMatrix> {
    let shape = a.shape();
    if shape[0] != shape[1] {
        return Err(PyValueError::new_err(format!("expected a square matrix, got shape {shape:?}")));
    }
    let data: Vec<Complex64> = a.as_array().iter().copied().collect();
    ComplexMatrix::from_row_major(shape[0], data).map_err(py_err)
}

fn parse_frame(text: &str) -> PyResult<Frame> {
    match text {
        "position" => Ok(Frame::Position),
        "eigen" => Ok(Frame::Eigen),
        other => Err(PyValueError::new_err(format!("unknown frame '{other}' (expected position or eigen)"))),
    }
}

fn parse_scheme(text: &str) -> PyResult<SimplexScheme> {
    match text {
        "nested" => Ok(SimplexScheme::NestedGaussLegendre),
        "triangular" => Ok(SimplexScheme::TriangularFilter),
        other => Err(PyValueError::new_err(format!("unknown scheme '{other}' (expected nested or triangular)"))),
    }
}

fn step_config(order: usize, quad_orders: Option<Vec<usize>>, scheme: &str) -> PyResult<MagnusStepConfig> {
    let mut cfg = MagnusStepConfig::new(order, quad_orders.unwrap_or_else(|| vec![64; order]));
    cfg.scheme = parse_scheme(scheme)?;
    Ok(cfg)
}

fn rows_to_py<'py>(py: Python<'py>, rows: &[ResultRow]) -> PyResult<Vec<Bound<'py, PyDict>>> {
    rows.iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("experiment", r.experiment.id())?;
            d.set_item("order", r.order)?;
            d.set_item("n", r.n)?;
            d.set_item("x", r.x)?;
            d.set_item("value", r.value)?;
            d.set_item("unitarity_defect", r.unitarity_defect)?;
            Ok(d)
        })
        .collect()
}

/// Interaction-picture Hamiltonian `H_I(t) = e^{iAt} B e^{-iAt}`.
#[pyclass(name = "Oracle", module = "ipmagnus", frozen)]
struct PyOracle {
    inner: Arc<InteractionOracle>,
}

#[pymethods]
impl PyOracle {
    /// Periodic finite-difference `A = -Δ/2` on `N` points of `[-π, π)` with
    /// `B = V(x)`; `potential` is `cos`, `halfcos`, `zero` or `constant:<c>`.
    #[new]
    #[pyo3(signature = (n, potential = "cos", frame = "eigen"))]
    fn new(n: usize, potential: &str, frame: &str) -> PyResult<Self> {
        let spec = PotentialSpec::parse(potential).map_err(py_err)?;
        let inner = InteractionOracle::schrodinger(n, &spec, parse_frame(frame)?).map_err(py_err)?;
        Ok(Self { inner: Arc::new(inner) })
    }

    /// Oracle for arbitrary Hermitian `A`, `B`.
    #[staticmethod]
    #[pyo3(signature = (a, b, frame = "position"))]
    fn from_hermitian(a: PyReadonlyArray2<'_, Complex64>, b: PyReadonlyArray2<'_, Complex64>, frame: &str) -> PyResult<Self> {
        let inner = InteractionOracle::from_hermitian(&from_numpy(&a)?, &from_numpy(&b)?, parse_frame(frame)?).map_err(py_err)?;
        Ok(Self { inner: Arc::new(inner) })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn frame(&self) -> &'static str {
        match self.inner.frame() {
            Frame::Position => "position",
            Frame::Eigen => "eigen",
        }
    }

    fn kinetic_eigenvalues(&self) -> Vec<f64> {
        self.inner.kinetic_eigenvalues().to_vec()
    }

    fn kinetic<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyArray2<Complex64>>> {
        to_numpy(py, &self.inner.kinetic())
    }

    fn potential<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyArray2<Complex64>>> {
        to_numpy(py, &self.inner.potential())
    }

    /// `H_I(t)`.
    fn hamiltonian<'py>(&self, py: Python<'py>, t: f64) -> PyResult<Bound<'py, PyArray2<Complex64>>> {
        to_numpy(py, &self.inner.evaluate(t))
    }

    /// `e^{iAt}`.
    fn kinetic_phase<'py>(&self, py: Python<'py>, t: f64) -> PyResult<Bound<'py, PyArray2<Complex64>>> {
        to_numpy(py, &self.inner.kinetic_phase(t))
    }

    /// Exact interaction-picture propagator from `t0` to `t0 + dt`.
    fn exact_step<'py>(&self, py: Python<'py>, t0: f64, dt: f64) -> PyResult<Bound<'py, PyArray2<Complex64>>> {
        let inner = self.inner.clone();
        let u = py.detach(move || inner.exact_step(t0, dt)).map_err(py_err)?;
        to_numpy(py, &u)
    }

    fn __repr__(&self) -> String {
        format!("Oracle(dim={}, frame='{}')", self.dim(), self.frame())
    }
}

/// Order-`p` Magnus propagator over `[t0, t0 + dt]`.
#[pyfunction]
#[pyo3(signature = (oracle, t0, dt, order, quad_orders = None, scheme = "nested"))]
fn magnus_step<'py>(
    py: Python<'py>,
    oracle: &PyOracle,
    t0: f64,
    dt: f64,
    order: usize,
    quad_orders: Option<Vec<usize>>,
    scheme: &str,
) -> PyResult<Bound<'py, PyArray2<Complex64>>> {
    let cfg = step_config(order, quad_orders, scheme)?;
    let inner = oracle.inner.clone();
    let u = py.detach(move || magnus::magnus_step(inner.as_ref(), t0, dt, &cfg)).map_err(py_err)?;
    to_numpy(py, &u)
}

/// Truncated Magnus exponent `Ω_1 + … + Ω_p` (anti-Hermitian).
#[pyfunction]
#[pyo3(signature = (oracle, t0, dt, order, quad_orders = None, scheme = "nested"))]
fn magnus_exponent<'py>(
    py: Python<'py>,
    oracle: &PyOracle,
    t0: f64,
    dt: f64,
    order: usize,
    quad_orders: Option<Vec<usize>>,
    scheme: &str,
) -> PyResult<Bound<'py, PyArray2<Complex64>>> {
    let cfg = step_config(order, quad_orders, scheme)?;
    let inner = oracle.inner.clone();
    let omega = py.detach(move || magnus::magnus_exponent(inner.as_ref(), t0, dt, &cfg)).map_err(py_err)?;
    to_numpy(py, &omega)
}

/// Product of `steps` equal Magnus steps over `[0, t_final]`.
#[pyfunction]
#[pyo3(signature = (oracle, t_final, steps, order, quad_orders = None, scheme = "nested"))]
fn compose_global<'py>(
    py: Python<'py>,
    oracle: &PyOracle,
    t_final: f64,
    steps: usize,
    order: usize,
    quad_orders: Option<Vec<usize>>,
    scheme: &str,
) -> PyResult<Bound<'py, PyArray2<Complex64>>> {
    let cfg = step_config(order, quad_orders, scheme)?;
    let inner = oracle.inner.clone();
    let u = py.detach(move || magnus::compose_global(inner.as_ref(), t_final, steps, &cfg)).map_err(py_err)?;
    to_numpy(py, &u)
}

/// Midpoint product approximation of the time-ordered exponential on `[a, b]`.
#[pyfunction]
fn time_ordered<'py>(py: Python<'py>, oracle: &PyOracle, a: f64, b: f64, slices: usize) -> PyResult<Bound<'py, PyArray2<Complex64>>> {
    let inner = oracle.inner.clone();
    let u = py.detach(move || magnus::time_ordered_oracle(inner.as_ref(), a, b, slices)).map_err(py_err)?;
    to_numpy(py, &u)
}

/// `Ω_n` over `[t0, t0 + h]`, from the permutation sum or, with
/// `reference=True`, from the nested-commutator form (`n ≤ 3`).
#[pyfunction]
#[pyo3(signature = (oracle, t0, h, n, quad_order, reference = false))]
fn omega<'py>(
    py: Python<'py>,
    oracle: &PyOracle,
    t0: f64,
    h: f64,
    n: usize,
    quad_order: usize,
    reference: bool,
) -> PyResult<Bound<'py, PyArray2<Complex64>>> {
    let inner = oracle.inner.clone();
    let opts = OmegaOptions::default();
    let m = py
        .detach(move || {
            if reference {
                magnus::omega_reference(inner.as_ref(), t0, h, n, quad_order, &opts)
            } else {
                magnus::omega_n(inner.as_ref(), t0, h, n, quad_order, &opts)
            }
        })
        .map_err(py_err)?;
    to_numpy(py, &m)
}

/// `[H_I(s_q), […[H_I(s_1), H_I(t)]…]]`.
#[pyfunction]
fn left_normed_comm<'py>(py: Python<'py>, oracle: &PyOracle, labels: Vec<f64>, innermost_t: f64) -> PyResult<Bound<'py, PyArray2<Complex64>>> {
    to_numpy(py, &magnus::left_normed_comm(&oracle.inner, &labels, innermost_t))
}

/// `C_{π,n}` for a permutation with `d` descents, as `(numerator, denominator)`.
#[pyfunction]
fn magnus_coefficient(n: usize, d: usize) -> PyResult<(i64, i64)> {
    let c = magnus::magnus_coefficient(n, d).map_err(py_err)?;
    Ok((*c.value.numer(), *c.value.denom()))
}

#[pyfunction]
fn spectral_norm(m: PyReadonlyArray2<'_, Complex64>) -> PyResult<f64> {
    Ok(dense_spectral_norm(&from_numpy(&m)?))
}

/// `‖U†U − I‖_F`.
#[pyfunction]
fn unitarity_defect(m: PyReadonlyArray2<'_, Complex64>) -> PyResult<f64> {
    Ok(from_numpy(&m)?.unitarity_defect())
}

/// Least-squares slope of `log y` against `log x`.
#[pyfunction]
fn fit_slope<'py>(py: Python<'py>, xs: Vec<f64>, ys: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    if xs.len() != ys.len() {
        return Err(PyValueError::new_err("xs and ys differ in length"));
    }
    let points: Vec<(f64, f64)> = xs.into_iter().zip(ys).collect();
    let fit = fit_loglog_slope(&points).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("slope", fit.slope)?;
    d.set_item("intercept", fit.intercept)?;
    d.set_item("r_squared", fit.r_squared)?;
    d.set_item("points_used", fit.points_used)?;
    d.set_item("excluded", fit.excluded)?;
    Ok(d)
}

/// Commutator-scaling sweep; one dict per `(N, h)` cell.
#[pyfunction]
#[pyo3(signature = (layers = 3, grids = None, h_values = None, labels = 7, potential = "cos", bracketing = "left-normed", frame = "eigen", workers = 1))]
fn comm_scaling<'py>(
    py: Python<'py>,
    layers: usize,
    grids: Option<Vec<usize>>,
    h_values: Option<Vec<f64>>,
    labels: usize,
    potential: &str,
    bracketing: &str,
    frame: &str,
    workers: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let defaults = CommScalingConfig::default();
    let cfg = CommScalingConfig {
        layers,
        grid_sizes: grids.unwrap_or(defaults.grid_sizes),
        h_values: h_values.unwrap_or(defaults.h_values),
        labels_per_h: labels,
        potential: PotentialSpec::parse(potential).map_err(py_err)?,
        bracketing: Bracketing::parse(bracketing).map_err(py_err)?,
        frame: parse_frame(frame)?,
        tree_budget: defaults.tree_budget,
    };
    let opts = RunOptions { workers, ..Default::default() };
    let rows = py.detach(|| run_comm_scaling(&cfg, &opts)).map_err(py_err)?;
    rows_to_py(py, &rows)
}

/// Single-step Magnus error against the exact propagator.
#[pyfunction]
#[pyo3(signature = (orders = None, n = 128, dt = None, quad = None, potential = "halfcos", t0 = 0.0, workers = 1))]
fn local_error<'py>(
    py: Python<'py>,
    orders: Option<Vec<usize>>,
    n: usize,
    dt: Option<Vec<f64>>,
    quad: Option<Vec<usize>>,
    potential: &str,
    t0: f64,
    workers: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let defaults = LocalErrorConfig::default();
    let cfg = LocalErrorConfig {
        orders: orders.unwrap_or(defaults.orders),
        n,
        dt_values: dt.unwrap_or(defaults.dt_values),
        quad_orders: quad.unwrap_or(defaults.quad_orders),
        potential: PotentialSpec::parse(potential).map_err(py_err)?,
        t0,
        ..defaults
    };
    let opts = RunOptions { workers, ..Default::default() };
    let rows = py.detach(|| run_local_error(&cfg, &opts)).map_err(py_err)?;
    rows_to_py(py, &rows)
}

/// Global error of `L` composed Magnus steps over `[0, t_final]`.
#[pyfunction]
#[pyo3(signature = (orders = None, t_final = 1.0, steps = None, n = 64, quad = None, potential = "halfcos", workers = 1))]
fn global_error<'py>(
    py: Python<'py>,
    orders: Option<Vec<usize>>,
    t_final: f64,
    steps: Option<Vec<usize>>,
    n: usize,
    quad: Option<Vec<usize>>,
    potential: &str,
    workers: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let defaults = GlobalErrorConfig::default();
    let cfg = GlobalErrorConfig {
        orders: orders.unwrap_or(defaults.orders),
        t_final,
        steps: steps.unwrap_or(defaults.steps),
        n,
        quad_orders: quad.unwrap_or(defaults.quad_orders),
        potential: PotentialSpec::parse(potential).map_err(py_err)?,
        ..defaults
    };
    let opts = RunOptions { workers, ..Default::default() };
    let rows = py.detach(|| run_global_error(&cfg, &opts)).map_err(py_err)?;
    rows_to_py(py, &rows)
}

/// Self-checking suite; returns `(passed, report_text)`.
#[pyfunction]
#[pyo3(signature = (seed = 7))]
fn verify(py: Python<'_>, seed: u64) -> PyResult<(bool, String)> {
    let report = py.detach(|| run_verification_suite(seed)).map_err(py_err)?;
    Ok((report.passed(), report.render()))
}

#[pymodule(name = "ipmagnus")]
fn ipmagnus_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOracle>()?;
    m.add_function(wrap_pyfunction!(magnus_step, m)?)?;
    m.add_function(wrap_pyfunction!(magnus_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(compose_global, m)?)?;
    m.add_function(wrap_pyfunction!(time_ordered, m)?)?;
    m.add_function(wrap_pyfunction!(omega, m)?)?;
    m.add_function(wrap_pyfunction!(left_normed_comm, m)?)?;
    m.add_function(wrap_pyfunction!(magnus_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_norm, m)?)?;
    m.add_function(wrap_pyfunction!(unitarity_defect, m)?)?;
    m.add_function(wrap_pyfunction!(fit_slope, m)?)?;
    m.add_function(wrap_pyfunction!(comm_scaling, m)?)?;
    m.add_function(wrap_pyfunction!(local_error, m)?)?;
    m.add_function(wrap_pyfunction!(global_error, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
