//! Python bindings. Matrices cross the boundary as nested lists (or 2-D
//! numpy arrays) of complex numbers; distributions as lists of floats.

use nambuq_core::brackets::{self, Functional};
use nambuq_core::dynamics::{self, DynamicsError, EvolutionSpec, Trajectory};
use nambuq_core::generators::{EntropyGenerator, F2Profile, GeneratorSpec};
use nambuq_core::harness::commands::cmd_run;
use nambuq_core::harness::output::trajectory_csv;
use nambuq_core::harness::verify::{run_suite, Bound as CheckBound, Suite};
use nambuq_core::infotheory::{self as info, ConditionalUpdate, LogBase, ProbDist};
use nambuq_core::matrix::{self, BipartiteShape, CMatrix, DensityMatrix, HermitianMatrix, Subsystem};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use std::path::Path;

create_exception!(nambuq, DriftAlarm, PyRuntimeError, "A conserved quantity drifted past the run tolerance.");

type Rows = Vec<Vec<Complex64>>;

fn value_error<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_cmatrix(rows: &Rows) -> PyResult<CMatrix> {
    let n = rows.len();
    if n == 0 {
        return Err(PyValueError::new_err("matrix is empty"));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(PyValueError::new_err(format!(
            "matrix row {i} has {} entries, expected {n}",
            r.len()
        )));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn from_cmatrix(m: &CMatrix) -> Rows {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn hermitian(rows: &Rows) -> PyResult<HermitianMatrix> {
    HermitianMatrix::new(to_cmatrix(rows)?).map_err(value_error)
}

fn density(rows: &Rows) -> PyResult<DensityMatrix> {
    DensityMatrix::from_matrix(to_cmatrix(rows)?).map_err(value_error)
}

fn dist(p: Vec<f64>) -> PyResult<ProbDist> {
    ProbDist::new(p).map_err(value_error)
}

fn base(b: f64) -> PyResult<LogBase> {
    LogBase::new(b).map_err(value_error)
}

fn subsystem(keep: &str) -> PyResult<Subsystem> {
    match keep {
        "first" => Ok(Subsystem::First),
        "second" => Ok(Subsystem::Second),
        other => Err(PyValueError::new_err(format!(
            "subsystem must be 'first' or 'second', got '{other}'"
        ))),
    }
}

/// Entropy generator `S` that drives the flow.
#[pyclass(name = "Generator", module = "nambuq", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyGenerator {
    inner: EntropyGenerator,
}

#[pymethods]
impl PyGenerator {
    /// `S = Tr(ρ²)/2`, which gives the linear equation.
    #[staticmethod]
    fn quadratic() -> Self {
        Self { inner: EntropyGenerator::Quadratic }
    }

    #[staticmethod]
    fn renyi_hom(alpha: f64) -> PyResult<Self> {
        let inner = EntropyGenerator::renyi_homogeneous(alpha).map_err(value_error)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn renyi_pure(alpha: f64) -> PyResult<Self> {
        let inner = EntropyGenerator::renyi_pure(alpha).map_err(value_error)?;
        Ok(Self { inner })
    }

    /// `S = g(Tr ρ²)` with `g(x) = x^exponent / 2`.
    #[staticmethod]
    #[pyo3(signature = (exponent = 2.0))]
    fn smooth_f2(exponent: f64) -> PyResult<Self> {
        let g = F2Profile::half_power(exponent).map_err(value_error)?;
        Ok(Self { inner: EntropyGenerator::SmoothF2(g) })
    }

    /// Builds a generator from its JSON config form. `shape = (d1, d2)` is
    /// required when composite parts act on subsystems.
    #[staticmethod]
    #[pyo3(signature = (json, shape = None))]
    fn from_json(json: &str, shape: Option<(usize, usize)>) -> PyResult<Self> {
        let spec: GeneratorSpec = serde_json::from_str(json).map_err(value_error)?;
        let shape = shape
            .map(|(d1, d2)| BipartiteShape::new(d1, d2))
            .transpose()
            .map_err(value_error)?;
        let inner = spec.build(shape).map_err(value_error)?;
        Ok(Self { inner })
    }

    #[getter]
    fn alpha(&self) -> Option<f64> {
        self.inner.alpha()
    }

    fn with_alpha(&self, alpha: f64) -> PyResult<Self> {
        match self.inner.with_alpha(alpha) {
            Some(r) => Ok(Self { inner: r.map_err(value_error)? }),
            None => Err(PyValueError::new_err("generator has no alpha")),
        }
    }

    fn value(&self, rho: Rows) -> PyResult<f64> {
        self.inner.value(&density(&rho)?).map_err(value_error)
    }

    fn gradient(&self, rho: Rows) -> PyResult<Rows> {
        let g = self.inner.gradient(&density(&rho)?).map_err(value_error)?;
        Ok(from_cmatrix(g.matrix()))
    }

    fn __repr__(&self) -> String {
        format!("Generator({:?})", self.inner)
    }
}

/// Recorded states of one integration run.
#[pyclass(name = "Trajectory", module = "nambuq", frozen)]
pub struct PyTrajectory {
    inner: Trajectory,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times.clone()
    }

    #[getter]
    fn states(&self) -> Vec<Rows> {
        self.inner.states.iter().map(|s| from_cmatrix(s.matrix())).collect()
    }

    /// `[Tr ρ, Tr ρ², ..., Tr ρ⁵]` at each recorded time.
    #[getter]
    fn moments(&self) -> Vec<Vec<f64>> {
        self.inner.diagnostics.iter().map(|d| d.moments.clone()).collect()
    }

    #[getter]
    fn eigenvalues(&self) -> Vec<Vec<f64>> {
        self.inner.diagnostics.iter().map(|d| d.eigenvalues.clone()).collect()
    }

    #[getter]
    fn generator_values(&self) -> Vec<f64> {
        self.inner.diagnostics.iter().map(|d| d.generator_value).collect()
    }

    #[getter]
    fn energies(&self) -> Vec<f64> {
        self.inner.diagnostics.iter().map(|d| d.energy).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn max_eigenvalue_drift(&self) -> f64 {
        self.inner.max_eigenvalue_drift()
    }

    fn max_moment_drift(&self) -> Vec<f64> {
        self.inner.max_moment_drift()
    }

    fn min_eigenvalue(&self) -> f64 {
        self.inner.min_eigenvalue()
    }

    /// Largest trace distance to the linear flow run at `speed · t`.
    #[pyo3(signature = (hamiltonian, speed = 1.0))]
    fn deviation_from_linear(&self, hamiltonian: Rows, speed: f64) -> PyResult<f64> {
        Ok(dynamics::max_deviation_from_linear(&self.inner, &hermitian(&hamiltonian)?, speed))
    }

    /// `Tr(ρ_t A) / Tr ρ_t` at each recorded time.
    fn observable(&self, a: Rows) -> PyResult<Vec<f64>> {
        dynamics::observable_average(&self.inner, &hermitian(&a)?).map_err(value_error)
    }

    /// The trajectory in the CLI's CSV layout.
    #[pyo3(signature = (observables = Vec::new()))]
    fn to_csv(&self, observables: Vec<(String, Rows)>) -> PyResult<String> {
        let obs = observables
            .iter()
            .map(|(l, m)| Ok((l.clone(), hermitian(m)?)))
            .collect::<PyResult<Vec<_>>>()?;
        trajectory_csv(&self.inner, &obs).map_err(value_error)
    }
}

/// Integrates `dρ/dτ = -i[Ĥ, ∇S(ρ)]` with fixed-step RK4.
///
/// Raises `DriftAlarm(message, partial_trajectory)` when a conserved
/// quantity drifts past `tolerance`.
#[pyfunction]
#[pyo3(signature = (hamiltonian, rho0, generator, t_final, dt, record_every = 1, tolerance = 1e-6, allow_unnormalized = false))]
#[allow(clippy::too_many_arguments)]
fn evolve(
    py: Python<'_>,
    hamiltonian: Rows,
    rho0: Rows,
    generator: &PyGenerator,
    t_final: f64,
    dt: f64,
    record_every: usize,
    tolerance: f64,
    allow_unnormalized: bool,
) -> PyResult<PyTrajectory> {
    let h = hermitian(&hamiltonian)?;
    let rho = if allow_unnormalized {
        DensityMatrix::with_tolerance(hermitian(&rho0)?, matrix::POSITIVITY_TOLERANCE).map_err(value_error)?
    } else {
        density(&rho0)?
    };
    let spec = EvolutionSpec::new(h, generator.inner.clone(), rho, t_final, dt)
        .map_err(value_error)?
        .record_every(record_every)
        .tolerance(tolerance)
        .allow_unnormalized(allow_unnormalized);
    spec.validate().map_err(value_error)?;
    match py.detach(|| dynamics::evolve(&spec)) {
        Ok(inner) => Ok(PyTrajectory { inner }),
        Err(e @ DynamicsError::Drift { .. }) => {
            let msg = e.to_string();
            let DynamicsError::Drift { partial, .. } = e else { unreachable!() };
            let partial = Py::new(py, PyTrajectory { inner: *partial })?;
            Err(DriftAlarm::new_err((msg, partial)))
        }
        Err(e) => Err(value_error(e)),
    }
}

/// `U ρ₀ U†` with `U = exp(-iĤt)`.
#[pyfunction]
fn exact_linear(hamiltonian: Rows, rho0: Rows, t: f64) -> PyResult<Rows> {
    let out = dynamics::exact_linear(&hermitian(&hamiltonian)?, &density(&rho0)?, t);
    Ok(from_cmatrix(out.matrix()))
}

/// Seeded random density matrix of the given rank.
#[pyfunction]
fn random_density(dim: usize, rank: usize, seed: u64) -> PyResult<Rows> {
    let rho = matrix::random_density(dim, rank, seed).map_err(value_error)?;
    Ok(from_cmatrix(rho.matrix()))
}

#[pyfunction]
fn trace_distance(a: Rows, b: Rows) -> PyResult<f64> {
    let (a, b) = (hermitian(&a)?, hermitian(&b)?);
    if a.dim() != b.dim() {
        return Err(PyValueError::new_err("matrices have different dimensions"));
    }
    Ok(matrix::trace_distance(&a, &b))
}

/// Reduced state on `keep` ("first" or "second") of a `d1 x d2` system.
#[pyfunction]
fn partial_trace(rho: Rows, d1: usize, d2: usize, keep: &str) -> PyResult<Rows> {
    let shape = BipartiteShape::new(d1, d2).map_err(value_error)?;
    let r = matrix::partial_trace(&density(&rho)?, shape, subsystem(keep)?).map_err(value_error)?;
    Ok(from_cmatrix(r.matrix()))
}

/// Support-restricted power `ρ^s`.
#[pyfunction]
fn matrix_power(rho: Rows, s: f64) -> PyResult<Rows> {
    let p = matrix::matrix_power(&density(&rho)?, s).map_err(value_error)?;
    Ok(from_cmatrix(p.matrix()))
}

/// `[Tr ρ, ..., Tr ρ^kmax]`.
#[pyfunction]
fn moments(rho: Rows, kmax: u32) -> PyResult<Vec<f64>> {
    Ok(matrix::moments(&density(&rho)?, kmax))
}

#[pyfunction]
#[pyo3(signature = (p, base = 2.0))]
fn shannon(p: Vec<f64>, base: f64) -> PyResult<f64> {
    Ok(info::shannon(&dist(p)?, self::base(base)?))
}

#[pyfunction]
#[pyo3(signature = (p, alpha, base = 2.0))]
fn renyi(p: Vec<f64>, alpha: f64, base: f64) -> PyResult<f64> {
    info::renyi(&dist(p)?, alpha, self::base(base)?).map_err(value_error)
}

#[pyfunction]
fn renyi_star(p: Vec<f64>, alpha: f64) -> PyResult<f64> {
    info::renyi_star(&dist(p)?, alpha).map_err(value_error)
}

#[pyfunction]
fn daroczy(p: Vec<f64>, alpha: f64) -> PyResult<f64> {
    info::daroczy(&dist(p)?, alpha).map_err(value_error)
}

fn update(prior: Vec<f64>, posterior: Vec<f64>) -> PyResult<ConditionalUpdate> {
    ConditionalUpdate::new(dist(prior)?, dist(posterior)?).map_err(value_error)
}

/// Gain of information; returns `(value, pathological)` where the flag
/// marks `alpha > 2`.
#[pyfunction]
#[pyo3(signature = (prior, posterior, alpha, base = 2.0))]
fn info_gain(prior: Vec<f64>, posterior: Vec<f64>, alpha: f64, base: f64) -> PyResult<(f64, bool)> {
    let g = info::info_gain(&update(prior, posterior)?, alpha, self::base(base)?).map_err(value_error)?;
    Ok((g.value, g.pathological))
}

#[pyfunction]
#[pyo3(signature = (prior, posterior, alpha, base = 2.0))]
fn info_loss(prior: Vec<f64>, posterior: Vec<f64>, alpha: f64, base: f64) -> PyResult<f64> {
    info::info_loss(&update(prior, posterior)?, alpha, self::base(base)?).map_err(value_error)
}

fn linear(a: &Rows) -> PyResult<Functional> {
    Functional::linear(hermitian(a)?).map_err(value_error)
}

/// `{Tr(ρA), Tr(ρB)}_S` at `rho`; the BBMJ bracket when `generator` is None.
#[pyfunction]
#[pyo3(signature = (a, b, rho, generator = None))]
fn bracket(a: Rows, b: Rows, rho: Rows, generator: Option<&PyGenerator>) -> PyResult<f64> {
    let (f, g, rho) = (linear(&a)?, linear(&b)?, density(&rho)?);
    match generator {
        None => brackets::bbmj_bracket(&f, &g, &rho),
        Some(s) => brackets::s_bracket(&f, &g, &s.inner, &rho),
    }
    .map_err(value_error)
}

/// `-i Tr([A, B] C)` for Hermitian gradients `A`, `B`, `C`.
#[pyfunction]
fn triple_bracket(a: Rows, b: Rows, c: Rows) -> PyResult<f64> {
    brackets::bracket_of_gradients(&hermitian(&a)?, &hermitian(&b)?, &hermitian(&c)?).map_err(value_error)
}

/// Jacobi defect of the S-bracket on three linear functionals.
#[pyfunction]
fn jacobi_defect(a: Rows, b: Rows, c: Rows, generator: &PyGenerator, rho: Rows) -> PyResult<f64> {
    brackets::jacobi_defect(&linear(&a)?, &linear(&b)?, &linear(&c)?, &generator.inner, &density(&rho)?)
        .map_err(value_error)
}

/// Runs a property suite; returns one dict per checked property.
#[pyfunction]
#[pyo3(signature = (suite, seed = 1, trials = None))]
fn verify<'py>(py: Python<'py>, suite: &str, seed: u64, trials: Option<usize>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let suite: Suite = suite.parse().map_err(PyValueError::new_err)?;
    let report = py.detach(|| run_suite(suite, seed, trials)).map_err(value_error)?;
    report
        .rows
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("suite", r.suite)?;
            d.set_item("property", &r.property)?;
            d.set_item("value", r.value)?;
            d.set_item("tolerance", r.tolerance)?;
            d.set_item("assertable", r.bound != CheckBound::ReportOnly)?;
            d.set_item("pass", r.passes())?;
            Ok(d)
        })
        .collect()
}

/// Runs a JSON config file like `nambuq run`; returns the report as a dict.
#[pyfunction]
fn run_config<'py>(py: Python<'py>, config: &str, out: &str) -> PyResult<Bound<'py, PyAny>> {
    let report = py
        .detach(|| cmd_run(Path::new(config), Path::new(out)))
        .map_err(value_error)?;
    py.import("json")?.call_method1("loads", (report.to_json(),))
}

#[pymodule]
pub fn nambuq(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGenerator>()?;
    m.add_class::<PyTrajectory>()?;
    m.add("DriftAlarm", m.py().get_type::<DriftAlarm>())?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(exact_linear, m)?)?;
    m.add_function(wrap_pyfunction!(random_density, m)?)?;
    m.add_function(wrap_pyfunction!(trace_distance, m)?)?;
    m.add_function(wrap_pyfunction!(partial_trace, m)?)?;
    m.add_function(wrap_pyfunction!(matrix_power, m)?)?;
    m.add_function(wrap_pyfunction!(moments, m)?)?;
    m.add_function(wrap_pyfunction!(shannon, m)?)?;
    m.add_function(wrap_pyfunction!(renyi, m)?)?;
    m.add_function(wrap_pyfunction!(renyi_star, m)?)?;
    m.add_function(wrap_pyfunction!(daroczy, m)?)?;
    m.add_function(wrap_pyfunction!(info_gain, m)?)?;
    m.add_function(wrap_pyfunction!(info_loss, m)?)?;
    m.add_function(wrap_pyfunction!(bracket, m)?)?;
    m.add_function(wrap_pyfunction!(triple_bracket, m)?)?;
    m.add_function(wrap_pyfunction!(jacobi_defect, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
