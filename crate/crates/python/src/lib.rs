use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qrd::quantum;
use qrd::ratedistortion::{self, DEFAULT_TOL};
use qrd::{realization, record, verify, ComplexMatrix, Error, C64};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::DimensionMismatch { .. } | Error::Capacity { .. } | Error::Shape(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn matrix(rows: Vec<Vec<C64>>) -> PyResult<ComplexMatrix> {
    ComplexMatrix::from_rows(&rows).map_err(to_py)
}

fn source(p0: f64) -> PyResult<ratedistortion::SourceSpec> {
    ratedistortion::SourceSpec::new(p0).map_err(to_py)
}

/// Diagonal qubit source `diag(p0, 1 - p0)`.
#[pyclass(name = "SourceSpec", frozen, from_py_object)]
#[derive(Clone)]
struct PySourceSpec(ratedistortion::SourceSpec);

#[pymethods]
impl PySourceSpec {
    #[new]
    fn new(p0: f64) -> PyResult<Self> {
        Ok(Self(source(p0)?))
    }

    #[getter]
    fn p0(&self) -> f64 {
        self.0.p0()
    }

    #[getter]
    fn p1(&self) -> f64 {
        self.0.p1()
    }

    fn entropy(&self) -> f64 {
        self.0.entropy()
    }

    fn d_max(&self) -> f64 {
        self.0.d_max()
    }

    fn distortion_at(&self, delta: f64) -> f64 {
        self.0.distortion_at(delta)
    }

    fn __repr__(&self) -> String {
        format!("SourceSpec(p0={})", self.0.p0())
    }
}

#[pyclass(name = "CurvePoint", frozen, from_py_object)]
#[derive(Clone)]
struct PyCurvePoint(ratedistortion::CurvePoint);

#[pymethods]
impl PyCurvePoint {
    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta
    }
    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha
    }
    #[getter]
    fn d(&self) -> f64 {
        self.0.d
    }
    #[getter]
    fn rate(&self) -> f64 {
        self.0.rate
    }
    #[getter]
    fn classical_rate(&self) -> f64 {
        self.0.classical_rate
    }
    #[getter]
    fn lambda1(&self) -> f64 {
        self.0.lambda1
    }

    fn __repr__(&self) -> String {
        let p = &self.0;
        format!("CurvePoint(delta={}, alpha={}, d={}, rate={})", p.delta, p.alpha, p.d, p.rate)
    }
}

/// Kraus channel built from a list of square complex matrices (nested lists).
#[pyclass(name = "KrausChannel", frozen, from_py_object)]
#[derive(Clone)]
struct PyKrausChannel(quantum::KrausChannel);

#[pymethods]
impl PyKrausChannel {
    #[new]
    #[pyo3(signature = (elements, trace_preserving = true))]
    fn new(elements: Vec<Vec<Vec<C64>>>, trace_preserving: bool) -> PyResult<Self> {
        let mats = elements.into_iter().map(matrix).collect::<PyResult<Vec<_>>>()?;
        Ok(Self(quantum::KrausChannel::new(mats, trace_preserving).map_err(to_py)?))
    }

    /// The optimal-form diagonal pair for angles `alpha`, `delta`.
    #[staticmethod]
    fn diagonal_pair(alpha: f64, delta: f64) -> Self {
        Self(ratedistortion::KrausPair::diagonal(alpha, delta).channel())
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn elements(&self) -> Vec<Vec<Vec<C64>>> {
        self.0.elements().iter().map(ComplexMatrix::rows).collect()
    }

    fn completeness_defect(&self) -> f64 {
        self.0.completeness_defect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

fn source_state(p0: f64, n_qubits: usize) -> PyResult<quantum::DensityMatrix> {
    source(p0)?.rho().tensor_power(n_qubits).map_err(to_py)
}

fn channel_state(ch: &PyKrausChannel, p0: f64) -> PyResult<quantum::DensityMatrix> {
    let n = ch.0.dim().trailing_zeros() as usize;
    source_state(p0, n)
}

#[pyfunction]
fn entanglement_fidelity(channel: &PyKrausChannel, p0: f64) -> PyResult<f64> {
    quantum::entanglement_fidelity(&channel_state(channel, p0)?, &channel.0).map_err(to_py)
}

#[pyfunction]
fn distortion(channel: &PyKrausChannel, p0: f64) -> PyResult<f64> {
    quantum::distortion(&channel_state(channel, p0)?, &channel.0).map_err(to_py)
}

#[pyfunction]
fn entropy_exchange(channel: &PyKrausChannel, p0: f64) -> PyResult<f64> {
    quantum::entropy_exchange(&channel_state(channel, p0)?, &channel.0).map_err(to_py)
}

/// Average output entropy over the Kraus decomposition.
#[pyfunction]
fn average_entropy(channel: &PyKrausChannel, p0: f64) -> PyResult<f64> {
    quantum::average_entropy(&channel.0, &channel_state(channel, p0)?).map_err(to_py)
}

/// Per-qubit distortion of a channel on a tensor power of the source.
#[pyfunction]
fn block_distortion(channel: &PyKrausChannel, p0: f64) -> PyResult<f64> {
    quantum::block_distortion(&channel.0, &source(p0)?.rho()).map_err(to_py)
}

#[pyfunction]
fn von_neumann_entropy(sigma: Vec<Vec<C64>>) -> PyResult<f64> {
    quantum::von_neumann_entropy(&matrix(sigma)?).map_err(to_py)
}

#[pyfunction]
fn binary_entropy(p: f64) -> PyResult<f64> {
    quantum::binary_entropy(p).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (delta, p0, tol = DEFAULT_TOL))]
fn solve_alpha(delta: f64, p0: f64, tol: f64) -> PyResult<f64> {
    ratedistortion::solve_alpha(delta, &source(p0)?, tol).map_err(to_py)
}

#[pyfunction]
fn stationarity_residual(alpha: f64, delta: f64, p0: f64) -> PyResult<f64> {
    ratedistortion::stationarity_residual(alpha, delta, &source(p0)?).map_err(to_py)
}

#[pyfunction]
fn r1_curve_point(delta: f64, p0: f64) -> PyResult<PyCurvePoint> {
    Ok(PyCurvePoint(ratedistortion::r1_curve_point(delta, &source(p0)?).map_err(to_py)?))
}

#[pyfunction]
#[pyo3(signature = (p0, n_points = 101))]
fn sweep_curve(p0: f64, n_points: usize) -> PyResult<Vec<PyCurvePoint>> {
    let pts = ratedistortion::sweep_curve(&source(p0)?, n_points).map_err(to_py)?;
    Ok(pts.into_iter().map(PyCurvePoint).collect())
}

/// Rows `(theta, d, S)` of the entropy-distortion bound.
#[pyfunction]
#[pyo3(signature = (p0, n_points = 101))]
fn s1_curve(p0: f64, n_points: usize) -> PyResult<Vec<(f64, f64, f64)>> {
    ratedistortion::s1_curve(&source(p0)?, n_points).map_err(to_py)
}

#[pyfunction]
fn s1_isotropic(d: f64) -> f64 {
    ratedistortion::s1_isotropic(d)
}

#[pyclass(name = "VerificationReport", frozen, from_py_object)]
#[derive(Clone)]
struct PyVerificationReport(verify::VerificationReport);

#[pymethods]
impl PyVerificationReport {
    #[getter]
    fn suite_name(&self) -> &str {
        &self.0.suite_name
    }
    #[getter]
    fn n_trials(&self) -> u64 {
        self.0.n_trials
    }
    #[getter]
    fn n_violations(&self) -> u64 {
        self.0.n_violations
    }
    #[getter]
    fn worst_violation(&self) -> f64 {
        self.0.worst_violation
    }
    #[getter]
    fn tolerance(&self) -> f64 {
        self.0.tolerance
    }
    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }
    #[getter]
    fn passed(&self) -> bool {
        self.0.passed
    }
    #[getter]
    fn params(&self) -> std::collections::BTreeMap<String, String> {
        self.0.params.clone()
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }

    fn to_json(&self) -> PyResult<String> {
        record::to_json(&self.0).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("VerificationReport(suite_name={:?}, passed={})", self.0.suite_name, self.0.passed)
    }
}

/// Runs a verification suite by name; `"all"` runs every suite.
#[pyfunction]
#[pyo3(signature = (suite, p0 = 0.5, n_trials = 10_000, seed = 0))]
fn run_suite(py: Python<'_>, suite: &str, p0: f64, n_trials: u64, seed: u64) -> PyResult<Vec<PyVerificationReport>> {
    let src = source(p0)?;
    let reports = py.detach(|| verify::run_named(suite, &src, n_trials, seed)).map_err(to_py)?;
    Ok(reports.into_iter().map(PyVerificationReport).collect())
}

#[pyclass(name = "RealizationCircuit", frozen, from_py_object)]
#[derive(Clone)]
struct PyRealizationCircuit(realization::RealizationCircuit);

#[pymethods]
impl PyRealizationCircuit {
    #[new]
    fn new(delta: f64, p0: f64) -> PyResult<Self> {
        Ok(Self(realization::build_circuit(delta, &source(p0)?).map_err(to_py)?))
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha
    }
    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta
    }

    /// 4x4 unitary on ancilla (x) source, ancilla first.
    fn unitary(&self) -> Vec<Vec<C64>> {
        self.0.unitary.rows()
    }

    fn kraus_pair(&self) -> PyKrausChannel {
        PyKrausChannel(self.0.kraus_pair.channel())
    }

    /// Stream simulation; returns the result fields as a dict.
    #[pyo3(signature = (p0, n_samples = 1_000_000, seed = 0))]
    fn simulate<'py>(&self, py: Python<'py>, p0: f64, n_samples: u64, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let src = source(p0)?;
        let circ = self.0.clone();
        let r = py.detach(|| realization::simulate_stream(&circ, &src, n_samples, seed)).map_err(to_py)?;
        let json = record::to_json(&r).map_err(to_py)?;
        py.import("json")?.call_method1("loads", (json,))
    }
}

pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySourceSpec>()?;
    m.add_class::<PyCurvePoint>()?;
    m.add_class::<PyKrausChannel>()?;
    m.add_class::<PyVerificationReport>()?;
    m.add_class::<PyRealizationCircuit>()?;
    m.add_function(wrap_pyfunction!(entanglement_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(distortion, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_exchange, m)?)?;
    m.add_function(wrap_pyfunction!(average_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(block_distortion, m)?)?;
    m.add_function(wrap_pyfunction!(von_neumann_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(binary_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(solve_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(stationarity_residual, m)?)?;
    m.add_function(wrap_pyfunction!(r1_curve_point, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_curve, m)?)?;
    m.add_function(wrap_pyfunction!(s1_curve, m)?)?;
    m.add_function(wrap_pyfunction!(s1_isotropic, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add("SUITES", verify::SUITES.to_vec())?;
    Ok(())
}

#[pymodule(name = "qrd")]
fn qrd_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
