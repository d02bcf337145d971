//! Python bindings.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use pinn_core::analysis::{problem_generalization_error, training_error};
use pinn_core::experiment::{
    run_experiment as core_run_experiment, verify, ExperimentConfig, ProblemConfig, Scale, Truth,
};
use pinn_core::field::Field;
use pinn_core::nn::{forward_jet, load_checkpoint, save_checkpoint, Activation, NetworkParams};
use pinn_core::problems::ProblemSpec;
use pinn_core::reference::fv_solve as core_fv_solve;
use pinn_core::sampling::{build_training_set, QuadratureKind, SetCounts, TrainingSet};
use pinn_core::train::{
    init_network, train as core_train, AdamConfig, Architecture, LbfgsConfig, LossConfig, OptimizerConfig,
};
use pinn_core::PinnError;

fn py_err(e: PinnError) -> PyErr {
    match e {
        PinnError::Divergence(_) | PinnError::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn flatten(points: &[Vec<f64>], dim: usize) -> PyResult<Vec<f64>> {
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(PyValueError::new_err(format!("expected points of length {dim}, got {}", p.len())));
    }
    Ok(points.concat())
}

fn rows(flat: Vec<f64>, width: usize) -> Vec<Vec<f64>> {
    flat.chunks_exact(width.max(1)).map(<[f64]>::to_vec).collect()
}

fn parse_activation(s: &str) -> PyResult<Activation> {
    match s {
        "tanh" => Ok(Activation::Tanh),
        "celu" => Ok(Activation::Celu),
        other => Err(PyValueError::new_err(format!("unknown activation `{other}`"))),
    }
}

fn parse_kind(s: &str) -> PyResult<QuadratureKind> {
    match s {
        "sobol" => Ok(QuadratureKind::Sobol),
        "monte_carlo" => Ok(QuadratureKind::MonteCarlo),
        "gauss_legendre" => Ok(QuadratureKind::GaussLegendre),
        other => Err(PyValueError::new_err(format!("unknown sampling kind `{other}`"))),
    }
}

/// A PDE problem from the built-in catalog.
#[pyclass(name = "Problem", module = "pinn_py", frozen)]
struct PyProblem {
    spec: ProblemSpec,
}

impl PyProblem {
    fn build(cfg: ProblemConfig) -> PyResult<Self> {
        Ok(Self { spec: cfg.build().map_err(py_err)? })
    }
}

#[pymethods]
impl PyProblem {
    #[staticmethod]
    fn heat_1d() -> PyResult<Self> {
        Self::build(ProblemConfig::Heat1d)
    }

    #[staticmethod]
    fn heat_nd(dimension: usize) -> PyResult<Self> {
        Self::build(ProblemConfig::HeatNd { dimension })
    }

    #[staticmethod]
    fn burgers_sine(nu: f64) -> PyResult<Self> {
        Self::build(ProblemConfig::BurgersSine { nu })
    }

    #[staticmethod]
    fn burgers_rarefaction(nu: f64) -> PyResult<Self> {
        Self::build(ProblemConfig::BurgersRarefaction { nu })
    }

    #[staticmethod]
    #[pyo3(signature = (a_x = 4.0, a_y = 0.0))]
    fn taylor_vortex(a_x: f64, a_y: f64) -> PyResult<Self> {
        Self::build(ProblemConfig::TaylorVortex { a_x, a_y })
    }

    #[getter]
    fn name(&self) -> String {
        self.spec.name.clone()
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.spec.pde.family()
    }

    #[getter]
    fn input_dim(&self) -> usize {
        self.spec.input_dim()
    }

    #[getter]
    fn output_dim(&self) -> usize {
        self.spec.output_dim
    }

    #[getter]
    fn t_final(&self) -> f64 {
        self.spec.t_final()
    }

    /// Exact solution at `(t, x...)` points, or `None` if there is none.
    fn exact(&self, points: Vec<Vec<f64>>) -> PyResult<Option<Vec<Vec<f64>>>> {
        let Some(e) = &self.spec.exact else { return Ok(None) };
        let flat = flatten(&points, self.spec.input_dim())?;
        Ok(Some(flat.chunks_exact(self.spec.input_dim()).map(|y| e.value(y)).collect()))
    }

    fn __repr__(&self) -> String {
        format!("Problem({}, family={})", self.spec.name, self.spec.pde.family())
    }
}

/// Collocation points and weights.
#[pyclass(name = "TrainingSet", module = "pinn_py", frozen)]
struct PyTrainingSet {
    inner: TrainingSet,
}

#[pymethods]
impl PyTrainingSet {
    #[new]
    #[pyo3(signature = (problem, kind, n_int, n_sb, n_tb, seed = 0))]
    fn new(problem: &PyProblem, kind: &str, n_int: usize, n_sb: usize, n_tb: usize, seed: u64) -> PyResult<Self> {
        let p = &problem.spec;
        let inner = build_training_set(
            &p.geometry,
            p.boundary.layout(),
            SetCounts { n_int, n_sb, n_tb },
            parse_kind(kind)?,
            seed,
        )
        .map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn n_int(&self) -> usize {
        self.inner.n_int()
    }

    #[getter]
    fn n_sb(&self) -> usize {
        self.inner.n_sb()
    }

    #[getter]
    fn n_tb(&self) -> usize {
        self.inner.n_tb()
    }

    fn interior_points(&self) -> Vec<Vec<f64>> {
        rows(self.inner.interior.points.clone(), self.inner.interior.dim)
    }
}

/// A dense network with input scaling.
#[pyclass(name = "Network", module = "pinn_py", frozen)]
struct PyNetwork {
    inner: NetworkParams,
}

#[pymethods]
impl PyNetwork {
    /// Freshly initialized network for `problem`.
    #[staticmethod]
    #[pyo3(signature = (problem, depth, width, activation = "tanh", seed = 0))]
    fn init(problem: &PyProblem, depth: usize, width: usize, activation: &str, seed: u64) -> PyResult<Self> {
        let arch = Architecture { depth, width, activation: parse_activation(activation)? };
        Ok(Self { inner: init_network(&problem.spec, &arch, seed).map_err(py_err)? })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: load_checkpoint(&path).map_err(py_err)? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_checkpoint(&self.inner, &path).map_err(py_err)
    }

    #[getter]
    fn n_params(&self) -> usize {
        self.inner.n_params()
    }

    #[getter]
    fn layer_dims(&self) -> Vec<usize> {
        self.inner.layer_dims().to_vec()
    }

    /// Outputs at a list of points.
    fn eval(&self, points: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        let flat = flatten(&points, self.inner.input_dim())?;
        Ok(rows(Field::eval(&self.inner, &flat), self.inner.output_dim()))
    }

    /// `(value, gradient, pure second derivatives)` at one point; the
    /// derivative arrays are `outputs x inputs`.
    fn jet(&self, point: Vec<f64>) -> PyResult<(Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let j = forward_jet(&self.inner, &point).map_err(py_err)?;
        let d = self.inner.input_dim();
        Ok((j.value.clone(), rows(j.grad.clone(), d), rows(j.hess_diag.clone(), d)))
    }
}

/// Trains with restarts. Returns the best network, its training error and
/// its loss history.
#[pyfunction]
#[pyo3(signature = (
    problem, sets, depth, width, activation = "tanh", lambda_residual = 1.0, lambda_reg = 0.0,
    reg_exponent = 2, optimizer = "lbfgs", iters = 500, learning_rate = 1e-3, restarts = 1, seed = 0
))]
#[allow(clippy::too_many_arguments)]
fn train(
    py: Python<'_>,
    problem: &PyProblem,
    sets: &PyTrainingSet,
    depth: usize,
    width: usize,
    activation: &str,
    lambda_residual: f64,
    lambda_reg: f64,
    reg_exponent: u32,
    optimizer: &str,
    iters: usize,
    learning_rate: f64,
    restarts: usize,
    seed: u64,
) -> PyResult<(PyNetwork, f64, Vec<f64>)> {
    let arch = Architecture { depth, width, activation: parse_activation(activation)? };
    let cfg = LossConfig { lambda_residual, reg_exponent, lambda_reg };
    let opt = match optimizer {
        "lbfgs" => OptimizerConfig::Lbfgs(LbfgsConfig::new(iters)),
        "adam" => OptimizerConfig::Adam(AdamConfig::new(iters, learning_rate)),
        other => return Err(PyValueError::new_err(format!("unknown optimizer `{other}`"))),
    };
    let (spec, set) = (&problem.spec, &sets.inner);
    let o = py.allow_threads(|| core_train(spec, set, &arch, &cfg, &opt, restarts, seed)).map_err(py_err)?;
    let e_t = training_error(&o.final_breakdown, &spec.pde).e_total;
    Ok((PyNetwork { inner: o.params }, e_t, o.loss_history))
}

/// `(absolute, relative percent)` L2 generalization error against the exact
/// solution or a finite-volume reference.
#[pyfunction]
#[pyo3(signature = (problem, network, n_test = 100_000, seed = 1, reference_cells = 2048))]
fn generalization_error(
    py: Python<'_>,
    problem: &PyProblem,
    network: &PyNetwork,
    n_test: usize,
    seed: u64,
    reference_cells: usize,
) -> PyResult<(f64, f64)> {
    let spec = &problem.spec;
    py.allow_threads(|| {
        let truth = Truth::for_problem(spec, reference_cells, 0.4)?;
        let field =
            truth.field().ok_or_else(|| PinnError::InvalidArgument("problem has no reference solution".into()))?;
        let g = problem_generalization_error(spec, &network.inner, field.as_ref(), n_test, seed)?;
        Ok((g.e_g, g.e_g_rel))
    })
    .map_err(py_err)
}

/// Final-time cell centres and averages of the finite-volume solver.
#[pyfunction]
#[pyo3(signature = (problem, n_cells, cfl = 0.4))]
fn fv_solve(problem: &PyProblem, n_cells: usize, cfl: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let g = core_fv_solve(&problem.spec, n_cells, problem.spec.t_final(), cfl).map_err(py_err)?;
    let x = (0..g.n_cells).map(|i| g.cell_center(i)).collect();
    Ok((x, g.cell_averages.last().cloned().unwrap_or_default()))
}

/// Runs an experiment from TOML text and returns the JSON summary.
#[pyfunction]
#[pyo3(signature = (config, scale = "desk", out = None))]
fn run_experiment(py: Python<'_>, config: &str, scale: &str, out: Option<PathBuf>) -> PyResult<String> {
    let scale: Scale = scale.parse().map_err(py_err)?;
    let cfg = ExperimentConfig::parse(config, scale).map_err(py_err)?;
    py.allow_threads(|| core_run_experiment(&cfg, out.as_deref())?.summary.to_json()).map_err(py_err)
}

/// Built-in numerical self-checks as `(name, value, passed)` tuples.
#[pyfunction]
fn self_check(py: Python<'_>) -> PyResult<Vec<(String, f64, bool)>> {
    let checks = py.allow_threads(verify::verify_all).map_err(py_err)?;
    Ok(checks.into_iter().map(|c| (c.name, c.value, c.passed)).collect())
}

#[pymodule]
fn pinn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PyTrainingSet>()?;
    m.add_class::<PyNetwork>()?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(generalization_error, m)?)?;
    m.add_function(wrap_pyfunction!(fv_solve, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(self_check, m)?)?;
    Ok(())
}
