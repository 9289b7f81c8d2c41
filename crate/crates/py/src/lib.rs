//! Python bindings: solver configuration, the smoothing run, curvature
//! maps, image metrics and synthetic patterns. Arrays are 2-D float64
//! numpy arrays indexed `[row, col]`.

use numpy::{IntoPyArray, PyArray2, PyReadonlyArray2};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use tnc_core::curvature::{
    gaussian_curvature_map, mean_curvature_map, normal_curvature_map, tnc_map, DirectionSet,
};
use tnc_core::grid::Scheme;
use tnc_core::{metrics, synth, Error, InitMode, PatternKind, PatternSpec, ScalarField, TncSolver};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::SolverDiverged { .. }
        | Error::FixedPointStalled { .. }
        | Error::DegenerateIterate(_)
        | Error::NonPositiveSymbol { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn field(a: PyReadonlyArray2<'_, f64>, h: f64) -> PyResult<ScalarField> {
    ScalarField::from_array(a.as_array().to_owned(), h).map_err(to_py)
}

fn array<'py>(py: Python<'py>, f: ScalarField) -> Bound<'py, PyArray2<f64>> {
    f.into_values().into_pyarray(py)
}

#[pyclass(name = "SolverConfig", get_all, set_all, from_py_object)]
#[derive(Clone, Debug)]
struct PySolverConfig {
    alpha: f64,
    beta: f64,
    gamma: f64,
    eta: f64,
    tau: f64,
    rho1: f64,
    rho2: f64,
    fp_tol: f64,
    fp_max_iter: usize,
    admm_tol: f64,
    i_max: usize,
    n_dirs: usize,
    stop_eps: f64,
    max_outer: usize,
    /// `"direct"` or `"smoothed"`.
    init_mode: String,
    init_epsilon: f64,
    energy_stride: usize,
    /// `"forward"` or `"backward"`.
    hessian_divergence: String,
}

impl From<&tnc_core::SolverConfig> for PySolverConfig {
    fn from(c: &tnc_core::SolverConfig) -> Self {
        Self {
            alpha: c.alpha,
            beta: c.beta,
            gamma: c.gamma,
            eta: c.eta,
            tau: c.tau,
            rho1: c.rho1,
            rho2: c.rho2,
            fp_tol: c.fp_tol,
            fp_max_iter: c.fp_max_iter,
            admm_tol: c.admm_tol,
            i_max: c.i_max,
            n_dirs: c.n_dirs,
            stop_eps: c.stop_eps,
            max_outer: c.max_outer,
            init_mode: match c.init_mode {
                InitMode::Direct => "direct",
                InitMode::Smoothed => "smoothed",
            }
            .into(),
            init_epsilon: c.init_epsilon,
            energy_stride: c.energy_stride,
            hessian_divergence: match c.hessian_divergence {
                Scheme::Forward => "forward",
                Scheme::Backward => "backward",
            }
            .into(),
        }
    }
}

impl PySolverConfig {
    fn to_core(&self) -> PyResult<tnc_core::SolverConfig> {
        let init_mode = self.init_mode.parse::<InitMode>().map_err(PyValueError::new_err)?;
        let hessian_divergence = match self.hessian_divergence.as_str() {
            "forward" => Scheme::Forward,
            "backward" => Scheme::Backward,
            other => {
                return Err(PyValueError::new_err(format!(
                    "hessian_divergence must be 'forward' or 'backward', got {other:?}"
                )))
            }
        };
        let cfg = tnc_core::SolverConfig {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            eta: self.eta,
            tau: self.tau,
            rho1: self.rho1,
            rho2: self.rho2,
            fp_tol: self.fp_tol,
            fp_max_iter: self.fp_max_iter,
            admm_tol: self.admm_tol,
            i_max: self.i_max,
            n_dirs: self.n_dirs,
            stop_eps: self.stop_eps,
            max_outer: self.max_outer,
            init_mode,
            init_epsilon: self.init_epsilon,
            energy_stride: self.energy_stride,
            hessian_divergence,
        };
        cfg.validate().map_err(to_py)?;
        Ok(cfg)
    }
}

#[pymethods]
impl PySolverConfig {
    /// Defaults, overridden by keyword arguments.
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut cfg = Self::from(&tnc_core::SolverConfig::default());
        if let Some(kwargs) = kwargs {
            for (key, value) in kwargs.iter() {
                let key: String = key.extract()?;
                macro_rules! assign {
                    ($($name:ident),*) => {
                        match key.as_str() {
                            $(stringify!($name) => cfg.$name = value.extract()?,)*
                            _ => return Err(PyValueError::new_err(format!("unknown parameter {key:?}"))),
                        }
                    };
                }
                assign!(
                    alpha, beta, gamma, eta, tau, rho1, rho2, fp_tol, fp_max_iter, admm_tol, i_max, n_dirs,
                    stop_eps, max_outer, init_mode, init_epsilon, energy_stride, hessian_divergence
                );
            }
        }
        cfg.to_core()?;
        Ok(cfg)
    }

    /// Raises `ValueError` if any parameter is out of range.
    fn validate(&self) -> PyResult<()> {
        self.to_core().map(|_| ())
    }

    fn __repr__(&self) -> String {
        format!("{self:?}").replacen("PySolverConfig", "SolverConfig", 1)
    }
}

#[pyclass(name = "DenoiseResult", get_all)]
struct PyDenoiseResult {
    u: Py<PyArray2<f64>>,
    iterations: usize,
    converged: bool,
    initial_energy: f64,
    /// NaN where the energy was not evaluated.
    energy_history: Vec<f64>,
    relerr_history: Vec<f64>,
}

/// Smooths `f` and returns the result with its iteration histories.
#[pyfunction]
#[pyo3(signature = (f, config = None, h = 1.0))]
fn denoise(
    py: Python<'_>,
    f: PyReadonlyArray2<'_, f64>,
    config: Option<PySolverConfig>,
    h: f64,
) -> PyResult<PyDenoiseResult> {
    let f = field(f, h)?;
    let cfg = match config {
        Some(c) => c.to_core()?,
        None => tnc_core::SolverConfig::default(),
    };
    let out = TncSolver::new(f.spec(), cfg).and_then(|s| s.run(&f)).map_err(to_py)?;
    Ok(PyDenoiseResult {
        iterations: out.reports.len(),
        converged: out.converged,
        initial_energy: out.state.initial_energy,
        energy_history: out.state.energy_history,
        relerr_history: out.state.relerr_history,
        u: array(py, out.u).unbind(),
    })
}

/// Energy of `u` for data `f`.
#[pyfunction]
#[pyo3(signature = (u, f, config = None, h = 1.0))]
fn energy(
    u: PyReadonlyArray2<'_, f64>,
    f: PyReadonlyArray2<'_, f64>,
    config: Option<PySolverConfig>,
    h: f64,
) -> PyResult<f64> {
    let (u, f) = (field(u, h)?, field(f, h)?);
    if u.spec().shape() != f.spec().shape() {
        return Err(PyValueError::new_err(format!(
            "shape mismatch: {:?} vs {:?}",
            u.spec().shape(),
            f.spec().shape()
        )));
    }
    let cfg = match config {
        Some(c) => c.to_core()?,
        None => tnc_core::SolverConfig::default(),
    };
    let dirs = DirectionSet::new(cfg.n_dirs).map_err(to_py)?;
    Ok(tnc_core::solver::energy(&u, &f, &cfg, &dirs))
}

/// Pointwise curvature map: `kind` is `"mean"`, `"gaussian"`, `"normal"`
/// (along `theta`) or `"tnc"` (over `n_dirs` directions).
#[pyfunction]
#[pyo3(signature = (v, kind = "tnc", theta = 0.0, n_dirs = 8, h = 1.0))]
fn curvature<'py>(
    py: Python<'py>,
    v: PyReadonlyArray2<'_, f64>,
    kind: &str,
    theta: f64,
    n_dirs: usize,
    h: f64,
) -> PyResult<Bound<'py, PyArray2<f64>>> {
    let v = field(v, h)?;
    let map = match kind {
        "mean" | "mc" => mean_curvature_map(&v),
        "gaussian" | "gc" => gaussian_curvature_map(&v),
        "normal" => normal_curvature_map(&v, theta),
        "tnc" => tnc_map(&v, &DirectionSet::new(n_dirs).map_err(to_py)?),
        other => return Err(PyValueError::new_err(format!("unknown curvature kind {other:?}"))),
    };
    Ok(array(py, map))
}

#[pyfunction]
#[pyo3(signature = (u, reference, peak = 1.0))]
fn psnr(u: PyReadonlyArray2<'_, f64>, reference: PyReadonlyArray2<'_, f64>, peak: f64) -> PyResult<f64> {
    metrics::psnr(&field(u, 1.0)?, &field(reference, 1.0)?, peak).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (u, reference, data_range = 1.0))]
fn ssim(u: PyReadonlyArray2<'_, f64>, reference: PyReadonlyArray2<'_, f64>, data_range: f64) -> PyResult<f64> {
    let params = metrics::SsimParams { range: data_range, ..Default::default() };
    metrics::ssim(&field(u, 1.0)?, &field(reference, 1.0)?, &params).map_err(to_py)
}

#[pyfunction]
fn mse(u: PyReadonlyArray2<'_, f64>, reference: PyReadonlyArray2<'_, f64>) -> PyResult<f64> {
    metrics::mean_squared_error(&field(u, 1.0)?, &field(reference, 1.0)?).map_err(to_py)
}

#[pyfunction]
fn l1_error(u: PyReadonlyArray2<'_, f64>, reference: PyReadonlyArray2<'_, f64>) -> PyResult<f64> {
    metrics::l1_error(&field(u, 1.0)?, &field(reference, 1.0)?).map_err(to_py)
}

#[pyfunction]
fn linf_error(u: PyReadonlyArray2<'_, f64>, reference: PyReadonlyArray2<'_, f64>) -> PyResult<f64> {
    metrics::linf_error(&field(u, 1.0)?, &field(reference, 1.0)?).map_err(to_py)
}

/// Binary test pattern: `"line"`, `"square"`, `"rings"` or `"disk"`.
#[pyfunction]
fn make_pattern<'py>(py: Python<'py>, kind: &str, rows: usize, cols: usize) -> PyResult<Bound<'py, PyArray2<f64>>> {
    let kind = kind.parse::<PatternKind>().map_err(PyValueError::new_err)?;
    let f = synth::make_pattern(&PatternSpec::new(kind, rows, cols)).map_err(to_py)?;
    Ok(array(py, f))
}

/// Adds seeded i.i.d. Gaussian noise; the same seed gives the same noise.
#[pyfunction]
fn add_gaussian_noise<'py>(
    py: Python<'py>,
    f: PyReadonlyArray2<'_, f64>,
    sigma: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyArray2<f64>>> {
    let noisy = synth::add_gaussian_noise(&field(f, 1.0)?, sigma, seed).map_err(to_py)?;
    Ok(array(py, noisy))
}

#[pymodule]
fn tnc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySolverConfig>()?;
    m.add_class::<PyDenoiseResult>()?;
    m.add_function(wrap_pyfunction!(denoise, m)?)?;
    m.add_function(wrap_pyfunction!(energy, m)?)?;
    m.add_function(wrap_pyfunction!(curvature, m)?)?;
    m.add_function(wrap_pyfunction!(psnr, m)?)?;
    m.add_function(wrap_pyfunction!(ssim, m)?)?;
    m.add_function(wrap_pyfunction!(mse, m)?)?;
    m.add_function(wrap_pyfunction!(l1_error, m)?)?;
    m.add_function(wrap_pyfunction!(linf_error, m)?)?;
    m.add_function(wrap_pyfunction!(make_pattern, m)?)?;
    m.add_function(wrap_pyfunction!(add_gaussian_noise, m)?)?;
    Ok(())
}
