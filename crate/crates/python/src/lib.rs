//! Python bindings. Matrices come back as nested lists of `complex`; run
//! configurations and reports cross the boundary as dicts with the same
//! layout as the CLI's JSON.

use laxkit::cli::{self, EvalFn, FamilyKind, RunConfig};
use laxkit::models::{ModelId, ModelParams};
use laxkit::phase::PhasePoint as CorePoint;
use laxkit::specfun::{EllipticParams, Spectral};
use laxkit::tensor::CMatrix;
use laxkit::verify::{self, CheckReport, DEFAULT_LAMBDA, DEFAULT_MU, DEFAULT_NU};
use laxkit::Error;
use num_complex::Complex64 as C64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(laxkit, LaxkitError, PyException, "Numerical failure inside laxkit.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::InvalidParams(_) | Error::Dimension(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => LaxkitError::new_err(other.to_string()),
    }
}

fn json_dumps(obj: &Bound<'_, PyAny>) -> PyResult<String> {
    obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()
}

fn json_loads<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn report_dict<'py>(py: Python<'py>, r: &CheckReport) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(r).map_err(|e| LaxkitError::new_err(e.to_string()))?;
    json_loads(py, &text)
}

fn config_from(obj: &Bound<'_, PyAny>) -> PyResult<RunConfig> {
    let text = match obj.extract::<String>() {
        Ok(s) => s,
        Err(_) => json_dumps(obj)?,
    };
    RunConfig::from_json(&text).map_err(to_py)
}

fn matrix(m: &CMatrix) -> Vec<Vec<C64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// Elliptic functions of the lattice with half-periods `omega1`, `omega2`.
#[pyclass(name = "EllipticLattice", frozen)]
struct PyLattice(EllipticParams);

#[pymethods]
impl PyLattice {
    #[new]
    fn new(omega1: C64, omega2: C64) -> PyResult<Self> {
        EllipticParams::new(omega1, omega2).map(PyLattice).map_err(to_py)
    }

    #[getter]
    fn omega1(&self) -> C64 {
        self.0.omega1()
    }

    #[getter]
    fn omega2(&self) -> C64 {
        self.0.omega2()
    }

    #[getter]
    fn eta1(&self) -> C64 {
        self.0.eta1()
    }

    #[getter]
    fn eta2(&self) -> C64 {
        self.0.eta2()
    }

    fn sigma(&self, z: C64) -> PyResult<C64> {
        self.0.sigma(z).map_err(to_py)
    }

    fn zeta(&self, z: C64) -> PyResult<C64> {
        self.0.zeta(z).map_err(to_py)
    }

    fn wp(&self, z: C64) -> PyResult<C64> {
        self.0.wp(z).map_err(to_py)
    }

    fn wp_prime(&self, z: C64) -> PyResult<C64> {
        self.0.wp_prime(z).map_err(to_py)
    }

    /// `Φ(x, λ) = σ(x + λ) / (σ(x) σ(λ))`.
    fn phi(&self, x: C64, lam: C64) -> PyResult<C64> {
        self.0.phi(x, lam).map_err(to_py)
    }

    fn lattice_distance(&self, z: C64) -> f64 {
        self.0.lattice_distance(z)
    }

    fn __repr__(&self) -> String {
        format!("EllipticLattice(omega1={}, omega2={})", self.0.omega1(), self.0.omega2())
    }
}

/// Phase-space point. Spin data, when present, comes from `Model.sample`.
#[pyclass(name = "PhasePoint", frozen, from_py_object)]
#[derive(Clone)]
struct PyPoint(CorePoint);

#[pymethods]
impl PyPoint {
    #[new]
    fn new(q: Vec<f64>, p: Vec<f64>) -> PyResult<Self> {
        CorePoint::new(q, p).map(PyPoint).map_err(to_py)
    }

    #[getter]
    fn q(&self) -> Vec<f64> {
        self.0.q().to_vec()
    }

    #[getter]
    fn p(&self) -> Vec<f64> {
        self.0.p().to_vec()
    }

    #[getter]
    fn has_spin(&self) -> bool {
        self.0.spin().is_some()
    }

    fn __len__(&self) -> usize {
        self.0.n()
    }

    fn __repr__(&self) -> String {
        format!("PhasePoint(q={:?}, p={:?})", self.0.q(), self.0.p())
    }
}

/// A catalog model: `Model("cm-elliptic", 3, {"nu": 1.0})`.
#[pyclass(name = "Model", frozen)]
struct PyModel {
    model: laxkit::models::Model,
    config: RunConfig,
}

impl PyModel {
    fn lambda(&self, lam: Option<C64>) -> Spectral {
        match lam {
            Some(l) => Spectral::Finite(l),
            None if self.model.has_spectral() => Spectral::Finite(DEFAULT_LAMBDA),
            None => Spectral::Infinite,
        }
    }

    fn mu(&self, mu: Option<C64>) -> Spectral {
        match mu {
            Some(m) => Spectral::Finite(m),
            None if self.model.has_spectral() => Spectral::Finite(DEFAULT_MU),
            None => Spectral::Infinite,
        }
    }
}

#[pymethods]
impl PyModel {
    #[new]
    #[pyo3(signature = (model_id, n, params = None))]
    fn new(model_id: &str, n: usize, params: Option<&Bound<'_, PyAny>>) -> PyResult<Self> {
        let id: ModelId = model_id.parse().map_err(to_py)?;
        let params: ModelParams = match params {
            Some(p) => serde_json::from_str(&json_dumps(p)?).map_err(|e| PyValueError::new_err(e.to_string()))?,
            None => ModelParams::default(),
        };
        let model = laxkit::models::Model::from_id(id, n, &params).map_err(to_py)?;
        let config = RunConfig {
            model: vec![id],
            n: vec![n],
            params,
            ..RunConfig::default()
        };
        Ok(PyModel { model, config })
    }

    #[getter]
    fn id(&self) -> &'static str {
        self.model.id().as_str()
    }

    #[getter]
    fn n(&self) -> usize {
        self.model.n()
    }

    /// Matrix size of the Lax operator.
    #[getter]
    fn size(&self) -> usize {
        self.model.size()
    }

    #[getter]
    fn has_spectral(&self) -> bool {
        self.model.has_spectral()
    }

    #[getter]
    fn convention(&self) -> String {
        format!("{:?}", self.model.convention()).to_lowercase()
    }

    fn describe(&self) -> String {
        self.model.describe()
    }

    /// Random point in the model's sampling region; same stream as the CLI.
    #[pyo3(signature = (seed = 0))]
    fn sample(&self, seed: u64) -> PyResult<PyPoint> {
        cli::sample_point(&self.model, seed, &self.config, self.model.backend())
            .map(PyPoint)
            .map_err(to_py)
    }

    #[pyo3(signature = (point, lam = None))]
    fn lax(&self, point: &PyPoint, lam: Option<C64>) -> PyResult<Vec<Vec<C64>>> {
        self.model.lax(&point.0, self.lambda(lam)).map(|m| matrix(&m)).map_err(to_py)
    }

    /// `r₁₂(λ, μ)` as a `size² × size²` matrix.
    #[pyo3(signature = (point, lam = None, mu = None))]
    fn r_matrix(&self, point: &PyPoint, lam: Option<C64>, mu: Option<C64>) -> PyResult<Vec<Vec<C64>>> {
        self.model
            .r_matrix(&point.0, self.lambda(lam), self.mu(mu))
            .map(|r| matrix(r.matrix()))
            .map_err(to_py)
    }

    fn hamiltonian(&self, point: &PyPoint) -> PyResult<C64> {
        self.model.hamiltonian().value(&point.0).map_err(to_py)
    }

    #[pyo3(signature = (point, lam = None))]
    fn eigenvalues(&self, point: &PyPoint, lam: Option<C64>) -> PyResult<Vec<C64>> {
        let l = self.model.lax(&point.0, self.lambda(lam)).map_err(to_py)?;
        laxkit::tensor::eigvals(&l).map_err(to_py)
    }

    /// Linear r-matrix relation (quadratic structure for RS models).
    #[pyo3(signature = (point, lam = None, mu = None, tol = 1e-7))]
    fn check_r_matrix<'py>(
        &self,
        py: Python<'py>,
        point: &PyPoint,
        lam: Option<C64>,
        mu: Option<C64>,
        tol: f64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let (l, m) = (lam.unwrap_or(DEFAULT_LAMBDA), mu.unwrap_or(DEFAULT_MU));
        let r = if self.model.is_rs() {
            verify::check_quadratic_rs(&self.model, &point.0, l, m, tol)
        } else {
            verify::check_linear_rma(&self.model, &point.0, l, m, self.model.backend(), tol)
        };
        report_dict(py, &r)
    }

    /// `{Tr Lᵐ, Tr Lᵏ}`.
    #[pyo3(signature = (point, m, k, tol = 1e-7))]
    fn check_involution<'py>(&self, py: Python<'py>, point: &PyPoint, m: u32, k: u32, tol: f64) -> PyResult<Bound<'py, PyAny>> {
        let r = verify::check_involution(&self.model, &point.0, (m, k), DEFAULT_LAMBDA, DEFAULT_MU, self.model.backend(), tol);
        report_dict(py, &r)
    }

    #[pyo3(signature = (point, tol = 1e-7))]
    fn check_yb2<'py>(&self, py: Python<'py>, point: &PyPoint, tol: f64) -> PyResult<Bound<'py, PyAny>> {
        let r = verify::check_yb2(&self.model, &point.0, [DEFAULT_LAMBDA, DEFAULT_MU, DEFAULT_NU], tol);
        report_dict(py, &r)
    }

    fn __repr__(&self) -> String {
        format!("Model({:?}, {})", self.model.id().as_str(), self.model.n())
    }
}

/// Model ids of the catalog.
#[pyfunction]
fn models() -> Vec<&'static str> {
    ModelId::ALL.iter().map(|m| m.as_str()).collect()
}

/// Run `verify` on a config dict (or JSON string) and return the report.
#[pyfunction]
fn run_verify<'py>(py: Python<'py>, config: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let c = config_from(config)?;
    let report = py.detach(|| cli::verify(&c)).map_err(to_py)?;
    json_loads(py, &report.to_json())
}

/// Run `scan` on a config dict (or JSON string) and return the report.
#[pyfunction]
fn run_scan<'py>(py: Python<'py>, config: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let c = config_from(config)?;
    let report = py.detach(|| cli::scan(&c)).map_err(to_py)?;
    json_loads(py, &report.to_json())
}

/// Integrate one model; returns `(report, trajectory_tsv, abort_reason)`.
#[pyfunction]
fn run_evolve<'py>(py: Python<'py>, config: &Bound<'py, PyAny>) -> PyResult<(Bound<'py, PyAny>, String, Option<String>)> {
    let c = config_from(config)?;
    let out = py.detach(|| cli::evolve(&c)).map_err(to_py)?;
    Ok((json_loads(py, &out.report.to_json())?, out.table, out.aborted))
}

/// Special function by name: `sigma`, `zeta`, `wp`, `phi`, `l`, `f` or `C`.
#[pyfunction]
#[pyo3(name = "eval", signature = (function, x, lam = None, family = "elliptic", params = None))]
fn eval_fn(
    function: &str,
    x: C64,
    lam: Option<C64>,
    family: &str,
    params: Option<&Bound<'_, PyAny>>,
) -> PyResult<C64> {
    let f = match function {
        "sigma" => EvalFn::Sigma,
        "zeta" => EvalFn::Zeta,
        "wp" => EvalFn::Wp,
        "phi" => EvalFn::Phi,
        "l" => EvalFn::L,
        "f" => EvalFn::F,
        "C" => EvalFn::C,
        other => return Err(PyValueError::new_err(format!("unknown function '{other}'"))),
    };
    let kind = match family {
        "rational" => FamilyKind::Rational,
        "hyperbolic" => FamilyKind::Hyperbolic,
        "elliptic" => FamilyKind::Elliptic,
        other => return Err(PyValueError::new_err(format!("unknown family '{other}'"))),
    };
    let params: ModelParams = match params {
        Some(p) => serde_json::from_str(&json_dumps(p)?).map_err(|e| PyValueError::new_err(e.to_string()))?,
        None => ModelParams::default(),
    };
    let args: Vec<C64> = std::iter::once(x).chain(lam).collect();
    cli::eval_function(f, &args, kind, &params).map_err(to_py)
}

/// Lax operators, dynamical r-matrices and identity checkers for
/// Calogero-Moser and Ruijsenaars-Schneider systems.
#[pymodule(name = "laxkit")]
pub mod laxkit_module {
    #[pymodule_export]
    use super::{eval_fn, models, run_evolve, run_scan, run_verify, LaxkitError, PyLattice, PyModel, PyPoint};

    #[pymodule_init]
    fn init(m: &pyo3::Bound<'_, pyo3::types::PyModule>) -> pyo3::PyResult<()> {
        use pyo3::types::PyModuleMethods;
        m.add("__version__", env!("CARGO_PKG_VERSION"))
    }
}
