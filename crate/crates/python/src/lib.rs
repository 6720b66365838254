//! Python bindings: `import sobolev_dfo_py`.
//!
//! Vectors are plain lists of floats and matrices are lists of rows. Library errors become
//! `ValueError` (bad input) or `RuntimeError` (numerical failures); file errors become `OSError`.

use std::cell::RefCell;

use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use sobolev_dfo::bench::{self, Metric, RunRecord, SolverKind, SuiteSpec};
use sobolev_dfo::interpolation::{self, InterpolationSet, LeastNormSpec};
use sobolev_dfo::problems::{self, SUITE};
use sobolev_dfo::quadratic::{self, Ball};
use sobolev_dfo::{Error, SolverConfig};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        Error::DimensionMismatch { .. }
        | Error::InvalidArgument(_)
        | Error::DuplicatePoints { .. }
        | Error::UnknownProblem(_)
        | Error::UnknownSolver(_)
        | Error::Parse { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn vector(v: Vec<f64>) -> DVector<f64> {
    DVector::from_vec(v)
}

fn matrix(rows: Vec<Vec<f64>>, n: usize) -> PyResult<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err(format!("expected a {n}x{n} matrix")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn points(rows: Vec<Vec<f64>>) -> Vec<DVector<f64>> {
    rows.into_iter().map(vector).collect()
}

/// Quadratic `c + g.(x - base) + 0.5 (x - base).H (x - base)`.
#[pyclass(name = "QuadraticModel", module = "sobolev_dfo_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyQuadratic {
    inner: quadratic::QuadraticModel,
}

#[pymethods]
impl PyQuadratic {
    #[new]
    fn new(base: Vec<f64>, c: f64, g: Vec<f64>, h: Vec<Vec<f64>>) -> PyResult<Self> {
        let n = base.len();
        let inner = quadratic::QuadraticModel::new(vector(base), c, vector(g), matrix(h, n)?).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn base(&self) -> Vec<f64> {
        self.inner.base().as_slice().to_vec()
    }

    #[getter]
    fn constant(&self) -> f64 {
        self.inner.constant()
    }

    #[getter]
    fn gradient(&self) -> Vec<f64> {
        self.inner.gradient().as_slice().to_vec()
    }

    #[getter]
    fn hessian(&self) -> Vec<Vec<f64>> {
        let h = self.inner.hessian();
        h.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    fn evaluate(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.evaluate(&vector(x)).map_err(to_py)
    }

    fn gradient_at(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.gradient_at(&vector(x)).map_err(to_py)?.as_slice().to_vec())
    }

    fn rebase(&self, base: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: self.inner.rebase(&vector(base)).map_err(to_py)? })
    }

    /// H1 seminorm over the ball with the given center and radius.
    fn seminorm(&self, center: Vec<f64>, radius: f64) -> PyResult<f64> {
        let ball = Ball::new(vector(center), radius).map_err(to_py)?;
        quadratic::h1_seminorm(&self.inner, &ball).map_err(to_py)
    }

    fn __call__(&self, x: Vec<f64>) -> PyResult<f64> {
        self.evaluate(x)
    }

    fn __repr__(&self) -> String {
        format!("QuadraticModel(dim={}, constant={})", self.inner.dim(), self.inner.constant())
    }
}

/// H1 seminorm of `q` over the ball `B(center, radius)`.
#[pyfunction]
fn seminorm(q: &PyQuadratic, center: Vec<f64>, radius: f64) -> PyResult<f64> {
    q.seminorm(center, radius)
}

/// Least-norm interpolant of `values` at `points`, with weight `sigma` around `x0`.
#[pyfunction]
#[pyo3(signature = (points, values, x0, sigma, prior=None))]
fn solve_p1(
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    x0: Vec<f64>,
    sigma: f64,
    prior: Option<PyQuadratic>,
) -> PyResult<PyQuadratic> {
    let set = InterpolationSet::new(self::points(points), values).map_err(to_py)?;
    let mut spec = LeastNormSpec::new(vector(x0), sigma);
    if let Some(p) = prior {
        spec = spec.with_prior(p.inner);
    }
    let inner = interpolation::solve_p1(&set, &spec).map_err(to_py)?;
    Ok(PyQuadratic { inner })
}

/// Values of all Lagrange functions of the least-norm problem at `x`.
#[pyfunction]
fn lagrange_values(points: Vec<Vec<f64>>, x0: Vec<f64>, sigma: f64, x: Vec<f64>) -> PyResult<Vec<f64>> {
    let system = sobolev_dfo::LeastNormSystem::new(&self::points(points), &vector(x0), sigma).map_err(to_py)?;
    Ok(system.lagrange_values(&vector(x)).map_err(to_py)?.as_slice().to_vec())
}

/// Result of a single minimization.
#[pyclass(name = "SolverReport", module = "sobolev_dfo_py", frozen, get_all)]
struct PyReport {
    x_best: Vec<f64>,
    fbest: f64,
    nf: usize,
    status: String,
    history: Vec<(usize, f64)>,
    message: Option<String>,
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        format!("SolverReport(fbest={:e}, nf={}, status={:?})", self.fbest, self.nf, self.status)
    }
}

fn config(
    solver: &str,
    rhobeg: f64,
    rhoend: f64,
    maxfun: usize,
    npt: Option<usize>,
    multiplier: f64,
    seed: u64,
) -> PyResult<SolverConfig> {
    let kind: SolverKind = solver.parse().map_err(to_py)?;
    Ok(SolverConfig {
        rhobeg,
        rhoend,
        maxfun,
        npt,
        sigma_rule: kind.sigma_rule(multiplier).map_err(to_py)?,
        seed,
    })
}

/// Minimizes the Python callable `f` (list of floats -> float) from `x0`.
///
/// An exception raised by `f` stops the run and is re-raised.
#[pyfunction]
#[pyo3(signature = (f, x0, solver="esymbs", rhobeg=0.5, rhoend=1e-6, maxfun=1000, npt=None, multiplier=10.0, seed=0))]
#[allow(clippy::too_many_arguments)]
fn minimize(
    f: &Bound<'_, PyAny>,
    x0: Vec<f64>,
    solver: &str,
    rhobeg: f64,
    rhoend: f64,
    maxfun: usize,
    npt: Option<usize>,
    multiplier: f64,
    seed: u64,
) -> PyResult<PyReport> {
    let config = config(solver, rhobeg, rhoend, maxfun, npt, multiplier, seed)?;
    let raised: RefCell<Option<PyErr>> = RefCell::new(None);
    let objective = |x: &[f64]| -> f64 {
        if raised.borrow().is_some() {
            return f64::NAN;
        }
        match f.call1((x.to_vec(),)).and_then(|v| v.extract::<f64>()) {
            Ok(v) => v,
            Err(e) => {
                *raised.borrow_mut() = Some(e);
                f64::NAN
            }
        }
    };
    let report = sobolev_dfo::minimize(objective, &x0, &config).map_err(to_py)?;
    if let Some(e) = raised.into_inner() {
        return Err(e);
    }
    Ok(PyReport {
        x_best: report.best_point,
        fbest: report.best_value,
        nf: report.nf,
        status: report.status.to_string(),
        history: report.history,
        message: report.message,
    })
}

/// Minimizes a named test problem from its standard starting point.
#[pyfunction]
#[pyo3(signature = (problem, n, solver="esymbs", rhobeg=0.5, rhoend=1e-6, maxfun=1000, npt=None, multiplier=10.0, seed=0))]
#[allow(clippy::too_many_arguments)]
fn solve(
    problem: &str,
    n: usize,
    solver: &str,
    rhobeg: f64,
    rhoend: f64,
    maxfun: usize,
    npt: Option<usize>,
    multiplier: f64,
    seed: u64,
) -> PyResult<PyReport> {
    let p = problems::instantiate(problem, n).map_err(to_py)?;
    let config = config(solver, rhobeg, rhoend, maxfun, npt, multiplier, seed)?;
    let report = sobolev_dfo::minimize(|x| p.eval(x), &p.start, &config).map_err(to_py)?;
    Ok(PyReport {
        x_best: report.best_point,
        fbest: report.best_value,
        nf: report.nf,
        status: report.status.to_string(),
        history: report.history,
        message: report.message,
    })
}

/// Names of the benchmark problems.
#[pyfunction]
fn problem_names() -> Vec<&'static str> {
    SUITE.to_vec()
}

/// `(start, known_fmin)` of a test problem.
#[pyfunction]
fn problem_info(name: &str, n: usize) -> PyResult<(Vec<f64>, Option<f64>)> {
    let p = problems::instantiate(name, n).map_err(to_py)?;
    Ok((p.start, p.known_fmin))
}

/// Objective value of a test problem at `x`.
#[pyfunction]
fn evaluate_problem(name: &str, x: Vec<f64>) -> PyResult<f64> {
    let p = problems::instantiate(name, x.len()).map_err(to_py)?;
    Ok(p.eval(&x))
}

/// The permutation drawn for `(n, seed)`.
#[pyfunction]
fn random_permutation(n: usize, seed: u64) -> Vec<usize> {
    problems::random_permutation(n, seed).as_slice().to_vec()
}

/// Runs the benchmark and returns the records CSV as a string.
#[pyfunction]
#[pyo3(signature = (problems=None, dims=vec![6, 8, 10], solvers=None, rhoends=vec![1e-6], perms=10, seed=0, rhobeg=0.5, maxfun=1000, npt=None, multiplier=10.0))]
#[allow(clippy::too_many_arguments)]
fn run_suite(
    py: Python<'_>,
    problems: Option<Vec<String>>,
    dims: Vec<usize>,
    solvers: Option<Vec<String>>,
    rhoends: Vec<f64>,
    perms: usize,
    seed: u64,
    rhobeg: f64,
    maxfun: usize,
    npt: Option<usize>,
    multiplier: f64,
) -> PyResult<String> {
    let solvers = match solvers {
        Some(names) => names.iter().map(|s| s.parse()).collect::<sobolev_dfo::Result<Vec<_>>>().map_err(to_py)?,
        None => SolverKind::ALL.to_vec(),
    };
    let spec = SuiteSpec {
        solvers,
        problems: problems.unwrap_or_else(|| SUITE.iter().map(|s| s.to_string()).collect()),
        dims,
        rhoends,
        perms,
        base_seed: seed,
        base: SolverConfig { rhobeg, maxfun, npt, ..Default::default() },
        multiplier,
    };
    spec.validate().map_err(to_py)?;
    let bytes = py.detach(|| bench::run_suite(&spec).and_then(|r| bench::emit_csv(&r))).map_err(to_py)?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn records(csv: &str) -> PyResult<Vec<RunRecord>> {
    bench::parse_csv(csv.as_bytes()).map_err(to_py)
}

/// `(mean, std, rstd, count)` of a list of evaluation counts.
#[pyfunction]
fn summarize(nf: Vec<usize>) -> PyResult<(f64, f64, f64, usize)> {
    let s = bench::summarize(&nf).map_err(to_py)?;
    Ok((s.mean, s.std, s.rstd, s.count))
}

/// Performance profile curves `{solver: [(tau, rho), ...]}` from a records CSV string.
#[pyfunction]
#[pyo3(signature = (records_csv, metric="mean"))]
fn profile(records_csv: &str, metric: &str) -> PyResult<Vec<(String, Vec<(f64, f64)>)>> {
    let metric: Metric = metric.parse().map_err(to_py)?;
    let curves = bench::profile_from_records(&records(records_csv)?, metric).map_err(to_py)?;
    Ok(curves.into_iter().map(|c| (c.solver, c.breakpoints)).collect())
}

/// Profile CSV (`solver,tau,rho`) from a records CSV string.
#[pyfunction]
#[pyo3(signature = (records_csv, metric="mean"))]
fn profile_csv(records_csv: &str, metric: &str) -> PyResult<String> {
    let metric: Metric = metric.parse().map_err(to_py)?;
    let curves = bench::profile_from_records(&records(records_csv)?, metric).map_err(to_py)?;
    let bytes = bench::emit_profile_csv(&curves).map_err(to_py)?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// SVG plot of the profile curves.
#[pyfunction]
#[pyo3(signature = (records_csv, metric="mean", title="performance profile"))]
fn profile_svg(records_csv: &str, metric: &str, title: &str) -> PyResult<String> {
    let metric: Metric = metric.parse().map_err(to_py)?;
    let curves = bench::profile_from_records(&records(records_csv)?, metric).map_err(to_py)?;
    Ok(bench::render_svg(&curves, title))
}

#[pymodule]
fn sobolev_dfo_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyQuadratic>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(seminorm, m)?)?;
    m.add_function(wrap_pyfunction!(solve_p1, m)?)?;
    m.add_function(wrap_pyfunction!(lagrange_values, m)?)?;
    m.add_function(wrap_pyfunction!(minimize, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(problem_names, m)?)?;
    m.add_function(wrap_pyfunction!(problem_info, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_problem, m)?)?;
    m.add_function(wrap_pyfunction!(random_permutation, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    m.add_function(wrap_pyfunction!(profile, m)?)?;
    m.add_function(wrap_pyfunction!(profile_csv, m)?)?;
    m.add_function(wrap_pyfunction!(profile_svg, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
