//! Python module `gtsfde`: kernels, structured operators, the time
//! stepper and the experiment runner.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use gtsfde::experiment::{self, ExperimentConfig, RunnerOptions};
use gtsfde::kernels::{self, KappaForm, WeightingFunction};
use gtsfde::krylov::{bicgstab, NoPreconditioner, Preconditioner, PreconditionerKind, SolveConfig};
use gtsfde::problems::{self, ManufacturedProblem};
use gtsfde::solver::{self as engine, Discretization, PathChoice, Scheme, SolverOptions, Storage};
use gtsfde::toeplitz::{self, BandedFactor, GsfInverse, SkewCirculantFactor};
use gtsfde::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::LinearSolveFailed { .. } | Error::SoeNotCertified { .. } | Error::QuadratureFailed { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn form(printed: bool) -> KappaForm {
    if printed {
        KappaForm::Printed
    } else {
        KappaForm::QuasiCompact
    }
}

fn preconditioner(name: &str, bandwidth: usize) -> PyResult<PreconditionerKind> {
    Ok(match name {
        "none" => PreconditionerKind::None,
        "banded" => PreconditionerKind::Banded(bandwidth),
        "skew_circulant" => PreconditionerKind::SkewCirculant,
        "gsf" => PreconditionerKind::ExactGsf,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown preconditioner `{other}` (none, banded, skew_circulant, gsf)"
            )))
        }
    })
}

/// WSGD weights `w_0..w_count`; `printed=True` selects κ₀ = (4-α)/6.
#[pyfunction]
#[pyo3(signature = (alpha, count, printed = false))]
fn wsgd_weights(alpha: f64, count: usize, printed: bool) -> PyResult<Vec<f64>> {
    Ok(kernels::wsgd_weights_with(alpha, count, form(printed)).map_err(py_err)?.w)
}

#[pyfunction]
#[pyo3(signature = (alpha, printed = false))]
fn w2_value(alpha: f64, printed: bool) -> PyResult<f64> {
    kernels::w2_value_with(alpha, form(printed)).map_err(py_err)
}

/// Order α₀ where `w_2` changes sign.
#[pyfunction]
#[pyo3(signature = (printed = false))]
fn w2_sign_change(printed: bool) -> f64 {
    kernels::w2_sign_change_with(form(printed))
}

/// L1 coefficients `c_0..c_{steps-1}` for λ(t) = exp(-bt).
#[pyfunction]
#[pyo3(signature = (gamma, tau, steps, b = 0.0))]
fn l1_coefficients(gamma: f64, tau: f64, steps: usize, b: f64) -> PyResult<Vec<f64>> {
    let lambda = WeightingFunction::tempered(b);
    Ok(kernels::l1_coefficients(gamma, &lambda, tau, steps).map_err(py_err)?.c)
}

#[pyfunction]
fn local_weight(gamma: f64, b: f64, tau: f64) -> PyResult<f64> {
    kernels::local_weight(gamma, b, tau).map_err(py_err)
}

#[pyfunction]
fn convergence_rate(e_coarse: f64, e_fine: f64, ratio: f64) -> PyResult<f64> {
    problems::convergence_rate(e_coarse, e_fine, ratio).map_err(py_err)
}

/// Sum-of-exponentials approximation of `t^(-γ)` on `[δ, T]`.
#[pyclass(name = "SoeApproximation", frozen)]
struct PySoe(kernels::SoeApproximation);

#[pymethods]
impl PySoe {
    #[new]
    fn new(gamma: f64, delta: f64, horizon: f64, epsilon: f64) -> PyResult<Self> {
        kernels::soe_build(gamma, delta, horizon, epsilon).map(PySoe).map_err(py_err)
    }

    #[getter]
    fn n_exp(&self) -> usize {
        self.0.n_exp()
    }

    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.0.nodes.clone()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.0.weights.clone()
    }

    fn __call__(&self, t: f64) -> f64 {
        self.0.eval(t)
    }
}

/// Toeplitz matrix with FFT matrix-vector products.
#[pyclass(name = "ToeplitzMatrix", frozen)]
struct PyToeplitz(toeplitz::ToeplitzMatrix);

#[pymethods]
impl PyToeplitz {
    #[new]
    fn new(first_col: Vec<f64>, first_row: Vec<f64>) -> PyResult<Self> {
        toeplitz::ToeplitzMatrix::new(first_col, first_row).map(PyToeplitz).map_err(py_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    fn matvec(&self, v: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.matvec(&v).map_err(py_err)
    }

    fn to_dense(&self) -> Vec<Vec<f64>> {
        self.0.to_dense()
    }
}

/// The per-step matrix `c₀I - diag(ξ)/h^α [pW + (1-p)Wᵀ]`.
#[pyclass(name = "SystemOperator", frozen)]
struct PySystem(toeplitz::SystemOperator);

#[pymethods]
impl PySystem {
    #[new]
    fn new(c0: f64, h: f64, alpha: f64, p: f64, diag_xi: Vec<f64>) -> PyResult<Self> {
        let n = diag_xi.len();
        let w = Arc::new(kernels::wsgd_weights(alpha, n + 1).map_err(py_err)?);
        let uniform = diag_xi.windows(2).all(|d| d[0] == d[1]);
        toeplitz::SystemOperator::new(c0, h, p, diag_xi, w, uniform)
            .map(PySystem)
            .map_err(py_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, v: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.apply(&v).map_err(py_err)
    }

    fn to_dense(&self) -> Vec<Vec<f64>> {
        self.0.to_dense()
    }

    fn is_diagonally_dominant(&self) -> bool {
        self.0.is_diagonally_dominant()
    }

    /// Preconditioned BiCGSTAB; returns `(x, iterations, converged, residual)`.
    #[pyo3(signature = (b, preconditioner = "skew_circulant", bandwidth = 8, rtol = 1e-12, max_iter = 2000))]
    fn solve(
        &self,
        py: Python<'_>,
        b: Vec<f64>,
        preconditioner: &str,
        bandwidth: usize,
        rtol: f64,
        max_iter: usize,
    ) -> PyResult<(Vec<f64>, f64, bool, f64)> {
        let kind = self::preconditioner(preconditioner, bandwidth)?;
        let cfg = SolveConfig {
            rtol,
            max_iter,
            preconditioner: kind,
            ..SolveConfig::default()
        };
        let op = &self.0;
        py.detach(|| {
            let pinv: Box<dyn Preconditioner> = match kind {
                PreconditionerKind::None => Box::new(NoPreconditioner),
                PreconditionerKind::Banded(l) => {
                    Box::new(BandedFactor::build(op, l.clamp(1, op.dim().saturating_sub(1).max(1)))?)
                }
                PreconditionerKind::SkewCirculant => Box::new(SkewCirculantFactor::build(op)?),
                PreconditionerKind::ExactGsf => Box::new(GsfInverse::build(op)?),
            };
            let r = bicgstab(op, pinv.as_ref(), &b, None, &cfg)?;
            Ok((r.x, r.iterations, r.converged, r.final_relative_residual))
        })
        .map_err(py_err)
    }

    /// Direct solve with the Gohberg–Semencul inverse (constant ξ only).
    fn gsf_solve(&self, b: Vec<f64>) -> PyResult<Vec<f64>> {
        GsfInverse::build(&self.0).and_then(|g| g.apply(&b)).map_err(py_err)
    }
}

/// A manufactured test problem.
#[pyclass(name = "Problem", frozen)]
struct PyProblem(ManufacturedProblem);

#[pymethods]
impl PyProblem {
    #[staticmethod]
    fn example1(gamma: f64, alpha: f64, b: f64, p: f64) -> PyResult<Self> {
        problems::example1(gamma, alpha, b, p).map(PyProblem).map_err(py_err)
    }

    #[staticmethod]
    fn example_a1(gamma: f64, alpha: f64, b: f64, p: f64) -> PyResult<Self> {
        problems::example_a1(gamma, alpha, b, p).map(PyProblem).map_err(py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (gamma, alpha, b, p, xi = 5.0))]
    fn example2(gamma: f64, alpha: f64, b: f64, p: f64, xi: f64) -> PyResult<Self> {
        problems::example2(gamma, alpha, b, p, xi).map(PyProblem).map_err(py_err)
    }

    #[getter]
    fn example(&self) -> &'static str {
        self.0.id.label()
    }

    #[getter]
    fn params(&self) -> (f64, f64, f64, f64) {
        (self.0.gamma, self.0.alpha, self.0.b, self.0.p)
    }

    #[getter]
    fn domain(&self) -> (f64, f64, f64) {
        (self.0.spec.x_left, self.0.spec.x_right, self.0.spec.horizon)
    }

    /// Exact solution, or `None` when the problem has none.
    fn exact(&self, x: f64, t: f64) -> Option<f64> {
        self.0.exact.as_ref().map(|u| u(x, t))
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

/// Result of [`solve`]: grid values plus run statistics.
#[pyclass(name = "Solution", frozen)]
struct PySolution {
    field: engine::SolutionField,
    report: engine::RunReport,
    exact: Option<gtsfde::solver::SpaceTimeFn>,
}

#[pymethods]
impl PySolution {
    /// Stored levels, each holding `u^j_0..u^j_N`.
    #[getter]
    fn levels(&self) -> Vec<Vec<f64>> {
        self.field.levels.clone()
    }

    #[getter]
    fn final_level(&self) -> Vec<f64> {
        self.field.final_level().to_vec()
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        (0..=self.field.n).map(|i| self.field.x(i)).collect()
    }

    #[getter]
    fn iterations(&self) -> Vec<f64> {
        self.report.iterations.clone()
    }

    #[getter]
    fn average_iterations(&self) -> f64 {
        self.report.average_iterations()
    }

    #[getter]
    fn path(&self) -> &'static str {
        self.report.path.label()
    }

    #[getter]
    fn memory_bytes(&self) -> usize {
        self.report.memory_bytes()
    }

    #[getter]
    fn wall_seconds(&self) -> f64 {
        self.report.wall_seconds
    }

    /// `(error_inf, error_l2)` against the exact solution over stored levels.
    fn errors(&self) -> PyResult<(f64, f64)> {
        let u = self
            .exact
            .as_ref()
            .ok_or_else(|| PyValueError::new_err("problem has no exact solution"))?;
        let e = problems::compute_errors(&self.field, &**u);
        Ok((e.error_inf, e.error_l2))
    }
}

/// Runs the direct (`scheme="direct"`) or fast (`"fast"`) scheme.
#[pyfunction]
#[pyo3(signature = (problem, n, m, scheme = "direct", epsilon = 1e-9, preconditioner = "skew_circulant", bandwidth = 8, rtol = 1e-12, path = "auto", final_only = false))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    problem: &PyProblem,
    n: usize,
    m: usize,
    scheme: &str,
    epsilon: f64,
    preconditioner: &str,
    bandwidth: usize,
    rtol: f64,
    path: &str,
    final_only: bool,
) -> PyResult<PySolution> {
    let scheme = match scheme {
        "direct" => Scheme::Direct,
        "fast" => Scheme::Fast,
        other => return Err(PyValueError::new_err(format!("unknown scheme `{other}`"))),
    };
    let path = match path {
        "auto" => PathChoice::Auto,
        "krylov" => PathChoice::Krylov,
        "dense" => PathChoice::Dense,
        "gsf" => PathChoice::Gsf,
        other => return Err(PyValueError::new_err(format!("unknown path `{other}`"))),
    };
    let options = SolverOptions {
        solve: SolveConfig {
            rtol,
            preconditioner: self::preconditioner(preconditioner, bandwidth)?,
            ..SolveConfig::default()
        },
        path,
        storage: if final_only { Storage::FinalOnly } else { Storage::Full },
    };
    let pr = &problem.0;
    let (field, report) = py
        .detach(|| {
            let disc = Discretization::new(&pr.spec, n, m, scheme, epsilon)?;
            engine::solve(&pr.spec, &disc, &options)
        })
        .map_err(py_err)?;
    Ok(PySolution {
        field,
        report,
        exact: pr.exact.clone(),
    })
}

/// Runs an experiment given as TOML text; returns one dict per table row.
#[pyfunction]
#[pyo3(signature = (config, timings = true))]
fn run_experiment<'py>(py: Python<'py>, config: &str, timings: bool) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = ExperimentConfig::from_toml_str(config).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let opts = RunnerOptions {
        timings,
        repetitions: None,
    };
    let report = py
        .detach(|| experiment::run_experiment(&cfg, &opts))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    report
        .rows
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("example", r.example.label())?;
            d.set_item("gamma", r.gamma)?;
            d.set_item("alpha", r.alpha)?;
            d.set_item("b", r.b)?;
            d.set_item("p", r.p)?;
            d.set_item("scheme", r.scheme.label())?;
            d.set_item("precond", &r.precond)?;
            d.set_item("N", r.n)?;
            d.set_item("M", r.m)?;
            d.set_item("err_inf", r.err_inf)?;
            d.set_item("rate_inf", r.rate_inf)?;
            d.set_item("err_l2", r.err_l2)?;
            d.set_item("rate_l2", r.rate_l2)?;
            d.set_item("iters_avg", r.iters_avg)?;
            d.set_item("wall_s", r.wall_s)?;
            d.set_item("mem_bytes", r.mem_bytes())?;
            Ok(d)
        })
        .collect()
}

/// Dense-oracle self checks; returns `(name, passed, detail)` triples.
#[pyfunction]
#[pyo3(signature = (seed = 0))]
fn verify(py: Python<'_>, seed: u64) -> Vec<(String, bool, String)> {
    py.detach(|| experiment::verify(seed))
        .into_iter()
        .map(|c| (c.name, c.passed, c.detail))
        .collect()
}

#[pymodule]
#[pyo3(name = "gtsfde")]
fn gtsfde_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(wsgd_weights, m)?)?;
    m.add_function(wrap_pyfunction!(w2_value, m)?)?;
    m.add_function(wrap_pyfunction!(w2_sign_change, m)?)?;
    m.add_function(wrap_pyfunction!(l1_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(local_weight, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_rate, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_class::<PySoe>()?;
    m.add_class::<PyToeplitz>()?;
    m.add_class::<PySystem>()?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PySolution>()?;
    Ok(())
}
