//! Python bindings for `calibr`.
//!
//! Forms and calibrations are wrapped as classes. The heavier checks return
//! plain dicts shaped like the `result` field of the matching CLI report, and
//! `run` executes any `calibr` command line in-process.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;
use serde::Serialize;

use calibr::cones::lambda_span;
use calibr::grassmann::{self, ComassOptions, SampleOptions};
use calibr::hessian::{self, FlatOptions, ScalarField};
use calibr::{calibrations, cli, verify};

fn err(e: calibr::Error) -> PyErr {
    use calibr::Error::*;
    match e {
        Lp(_) | CrossCheck { .. } | EpsilonUnderflow { .. } | MassNormalization { .. } | Io(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Converts through JSON so dicts match the CLI reports key for key.
fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A constant form (or p-vector) with 0-based multi-indices.
#[pyclass(name = "ExteriorElement", module = "calibr_py", from_py_object)]
#[derive(Clone)]
struct PyExterior {
    inner: calibr::ExteriorElement,
}

#[pymethods]
impl PyExterior {
    #[new]
    fn new(n: usize, p: usize, terms: Vec<(Vec<usize>, f64)>) -> PyResult<Self> {
        Ok(Self { inner: calibr::ExteriorElement::from_terms(n, p, terms).map_err(err)? })
    }

    /// Parses a 1-based JSON form spec.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: calibr::ExteriorElement::from_json(text).map_err(err)? })
    }

    #[staticmethod]
    fn vector(v: Vec<f64>) -> Self {
        Self { inner: calibr::ExteriorElement::vector(&v) }
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p()
    }

    fn terms(&self) -> Vec<(Vec<usize>, f64)> {
        self.inner.terms().map(|(i, c)| (i.to_vec(), c)).collect()
    }

    fn coeff(&self, indices: Vec<usize>) -> f64 {
        self.inner.coeff(&indices)
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    fn wedge(&self, other: &Self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.wedge(&other.inner).map_err(err)? })
    }

    fn interior(&self, v: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: self.inner.interior(&v).map_err(err)? })
    }

    fn hodge_star(&self) -> Self {
        Self { inner: self.inner.hodge_star() }
    }

    fn pairing(&self, other: &Self) -> PyResult<f64> {
        self.inner.pairing(&other.inner).map_err(err)
    }

    /// Value on the ordered vectors `vs`.
    fn evaluate(&self, vs: Vec<Vec<f64>>) -> PyResult<f64> {
        let refs: Vec<&[f64]> = vs.iter().map(Vec::as_slice).collect();
        self.inner.evaluate(&refs).map_err(err)
    }

    fn is_simple(&self, tol: Option<f64>) -> PyResult<bool> {
        self.inner.is_simple(tol.unwrap_or(1e-9)).map_err(err)
    }

    fn __add__(&self, other: &Self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.try_add(&other.inner).map_err(err)? })
    }

    fn __sub__(&self, other: &Self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.try_sub(&other.inner).map_err(err)? })
    }

    fn __mul__(&self, s: f64) -> Self {
        Self { inner: self.inner.scale(s) }
    }

    fn __rmul__(&self, s: f64) -> Self {
        self.__mul__(s)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("ExteriorElement(n={}, p={}, terms={})", self.inner.n(), self.inner.p(), self.inner.len())
    }
}

/// A catalogue or user calibration whose comass has been confirmed.
#[pyclass(name = "Calibration", module = "calibr_py", from_py_object)]
#[derive(Clone)]
struct PyCalibration {
    inner: calibr::Calibration,
}

#[pymethods]
impl PyCalibration {
    /// `kaehler:2,1`, `omega4`, `cayley`, or a path to a form spec.
    #[new]
    fn new(selector: &str) -> PyResult<Self> {
        Ok(Self { inner: calibr::Calibration::from_selector(selector).map_err(err)? })
    }

    /// Wraps a form after confirming its comass is 1.
    #[staticmethod]
    #[pyo3(signature = (form, name = "user", rescale = false))]
    fn from_form(form: &PyExterior, name: &str, rescale: bool) -> PyResult<Self> {
        let opts = ComassOptions::default();
        let inner = if rescale {
            calibr::Calibration::from_form_rescaled(name, form.inner.clone(), &opts)
        } else {
            calibr::Calibration::from_form(name, form.inner.clone(), &opts)
        };
        Ok(Self { inner: inner.map_err(err)? })
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn form(&self) -> PyExterior {
        PyExterior { inner: self.inner.form.clone() }
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p()
    }

    #[getter]
    fn comass_estimate(&self) -> Option<f64> {
        self.inner.comass_estimate
    }

    fn __repr__(&self) -> String {
        format!("Calibration({:?}, n={}, p={})", self.inner.name, self.inner.n(), self.inner.p())
    }
}

fn field(name: &str, n: usize) -> PyResult<ScalarField> {
    ScalarField::builtin(name.strip_prefix("builtin:").unwrap_or(name), n).map_err(err)
}

/// Catalogue entries as dicts with `name`, `selector`, `n`, `p`, `terms`.
#[pyfunction]
fn catalogue(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &calibrations::list())
}

/// `ω^p / p!` on `C^n`.
#[pyfunction]
fn kaehler_power(n: usize, p: usize) -> PyExterior {
    PyExterior { inner: calibrations::kaehler_power(n, p) }
}

/// Multistart comass estimate: `(value, maximizer frame, saturated)`.
#[pyfunction]
#[pyo3(signature = (form, multistarts = 64, seed = grassmann::DEFAULT_SEED))]
fn comass(form: &PyExterior, multistarts: usize, seed: u64) -> PyResult<(f64, Vec<Vec<f64>>, bool)> {
    let opts = ComassOptions { multistarts, seed, ..ComassOptions::default() };
    let r = grassmann::comass(&form.inner, &opts).map_err(err)?;
    Ok((r.value, r.maximizer.vectors(), r.saturated))
}

/// Calibrated planes as orthonormal frames.
#[pyfunction]
#[pyo3(signature = (cal, count = 32, seed = grassmann::DEFAULT_SEED))]
fn sample_planes(cal: &PyCalibration, count: usize, seed: u64) -> PyResult<Vec<Vec<Vec<f64>>>> {
    let set = grassmann::sample_grassmannian(&cal.inner, &SampleOptions::new(count, seed)).map_err(err)?;
    Ok(set.planes.iter().map(|pl| pl.vectors()).collect())
}

/// Dimension of the span of the sampled calibrated planes in `Λ^p`.
#[pyfunction]
#[pyo3(signature = (cal, count = 32, seed = grassmann::DEFAULT_SEED))]
fn lambda_dim(cal: &PyCalibration, count: usize, seed: u64) -> PyResult<usize> {
    let set = grassmann::sample_grassmannian(&cal.inner, &SampleOptions::new(count, seed)).map_err(err)?;
    Ok(lambda_span(&set).map_err(err)?.dim)
}

/// Classifies a builtin field at each point; one dict per point.
#[pyfunction]
#[pyo3(signature = (cal, field_name, points, count = 32, seed = grassmann::DEFAULT_SEED, tol = 1e-8))]
fn psh<'py>(
    py: Python<'py>,
    cal: &PyCalibration,
    field_name: &str,
    points: Vec<Vec<f64>>,
    count: usize,
    seed: u64,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let f = field(field_name, cal.inner.n())?;
    let set = grassmann::sample_grassmannian(&cal.inner, &SampleOptions::new(count, seed)).map_err(err)?;
    let r = hessian::psh_classify(&f, &points, &cal.inner, &set, tol).map_err(err)?;
    to_py(py, &r)
}

/// Least-squares residual of `H^φ f(x)` modulo `df ∧ Λ^{p-1} + Λ(φ)^⊥`.
#[pyfunction]
#[pyo3(signature = (cal, field_name, x, count = 32, seed = grassmann::DEFAULT_SEED))]
fn mod_d_residual(cal: &PyCalibration, field_name: &str, x: Vec<f64>, count: usize, seed: u64) -> PyResult<f64> {
    let f = field(field_name, cal.inner.n())?;
    let set = grassmann::sample_grassmannian(&cal.inner, &SampleOptions::new(count, seed)).map_err(err)?;
    let span = lambda_span(&set).map_err(err)?;
    Ok(hessian::pluriharmonic_mod_d_residual(&f, &x, &cal.inner.form, &span).map_err(err)?.residual)
}

#[pyfunction]
#[pyo3(signature = (cal, field_name, x, samples = 24, seed = grassmann::DEFAULT_SEED, tol = 1e-6))]
fn flat_check<'py>(
    py: Python<'py>,
    cal: &PyCalibration,
    field_name: &str,
    x: Vec<f64>,
    samples: usize,
    seed: u64,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let f = field(field_name, cal.inner.n())?;
    let r = hessian::phi_flat_check(&f, &x, &cal.inner, &FlatOptions { tol, samples, seed }).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (cal, trials = 10, seed = grassmann::DEFAULT_SEED, tol = 1e-6))]
fn normality<'py>(
    py: Python<'py>,
    cal: &PyCalibration,
    trials: usize,
    seed: u64,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &hessian::normality_check(&cal.inner, trials, seed, tol).map_err(err)?)
}

/// Runs one acceptance check by id: `(passed, detail)`.
#[pyfunction]
fn verify_check(py: Python<'_>, id: usize) -> PyResult<(bool, Bound<'_, PyAny>)> {
    if !verify::CHECKS.iter().any(|c| c.0 == id) {
        return Err(PyValueError::new_err(format!("no check with id {id}")));
    }
    let r = py.detach(|| verify::run_check(id));
    Ok((r.passed, to_py(py, &r.detail)?))
}

/// Runs a `calibr` command line and returns its report as a dict.
///
/// `run(["comass", "--cal", "cayley"])`
#[pyfunction]
fn run(py: Python<'_>, args: Vec<String>) -> PyResult<Bound<'_, PyAny>> {
    let argv = std::iter::once("calibr".to_string()).chain(args);
    let report = py.detach(|| cli::report_from_args(argv)).map_err(err)?;
    to_py(py, &report)
}

#[pymodule]
fn calibr_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyExterior>()?;
    m.add_class::<PyCalibration>()?;
    m.add_function(wrap_pyfunction!(catalogue, m)?)?;
    m.add_function(wrap_pyfunction!(kaehler_power, m)?)?;
    m.add_function(wrap_pyfunction!(comass, m)?)?;
    m.add_function(wrap_pyfunction!(sample_planes, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_dim, m)?)?;
    m.add_function(wrap_pyfunction!(psh, m)?)?;
    m.add_function(wrap_pyfunction!(mod_d_residual, m)?)?;
    m.add_function(wrap_pyfunction!(flat_check, m)?)?;
    m.add_function(wrap_pyfunction!(normality, m)?)?;
    m.add_function(wrap_pyfunction!(verify_check, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
