//! Python bindings: coupling sets, model parameters, single-point
//! simulation and theory, classification and grid sweeps.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use slsync::integrator::simulate_mean_field;
use slsync::networks::{self, DistributionSpec};
use slsync::observables::{measure, DEFAULT_N_BINS, DEFAULT_TOL_PHASE};
use slsync::sweep::{run_grid, AxisRange, CellRecord, CouplingSource, SweepMode, SweepSpec};
use slsync::theory::{self, Amplitude, SolverOptions};
use slsync::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter { .. } | Error::Config(_) | Error::DimensionMismatch { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn none_if_nan(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Per-oscillator coupling strengths K_j.
#[pyclass(name = "CouplingSet", module = "slsync_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCouplingSet(slsync::CouplingSet);

#[pymethods]
impl PyCouplingSet {
    #[new]
    fn new(values: Vec<f64>) -> PyResult<Self> {
        slsync::CouplingSet::new(values).map(Self).map_err(py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (n, k))]
    fn homogeneous(n: usize, k: f64) -> PyResult<Self> {
        slsync::CouplingSet::homogeneous(k, n).map(Self).map_err(py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (n, mean=0.02, sd=0.01, seed=0))]
    fn gaussian(n: usize, mean: f64, sd: f64, seed: u64) -> PyResult<Self> {
        networks::sample_couplings(&DistributionSpec::gaussian(mean, sd, seed), n).map(Self).map_err(py_err)
    }

    /// Truncated power law on [K_min, 20 K_min] with the given mean.
    #[staticmethod]
    #[pyo3(signature = (n, mean=0.02, gamma0=2.0, seed=0))]
    fn powerlaw(n: usize, mean: f64, gamma0: f64, seed: u64) -> PyResult<Self> {
        networks::sample_couplings(&DistributionSpec::powerlaw(mean, gamma0, seed), n).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        networks::load_couplings(&path).map(Self).map_err(py_err)
    }

    fn save(&self, path: std::path::PathBuf) -> PyResult<()> {
        networks::write_couplings(&path, &self.0).map_err(py_err)
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    #[getter]
    fn k_min(&self) -> f64 {
        self.0.k_min()
    }

    #[getter]
    fn k_max(&self) -> f64 {
        self.0.k_max()
    }

    #[getter]
    fn mean(&self) -> f64 {
        self.0.k_mean()
    }

    #[getter]
    fn sd(&self) -> f64 {
        self.0.sigma_k()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("CouplingSet(n={}, mean={:.4}, sd={:.4})", self.0.len(), self.0.k_mean(), self.0.sigma_k())
    }
}

/// Scalar model constants. `n` is filled in from the coupling set when
/// left at 0.
#[pyclass(name = "ModelParams", module = "slsync_py", get_all, set_all, skip_from_py_object)]
#[derive(Clone)]
struct PyModelParams {
    lam: f64,
    omega: f64,
    coupling_scale: f64,
    alpha: f64,
    beta: f64,
    d0: f64,
    n: usize,
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (alpha=0.0, beta=0.0, d0=1.0, lam=1.0, omega=std::f64::consts::PI, coupling_scale=1.0, n=0))]
    fn new(alpha: f64, beta: f64, d0: f64, lam: f64, omega: f64, coupling_scale: f64, n: usize) -> PyResult<Self> {
        let p = Self { lam, omega, coupling_scale, alpha, beta, d0, n };
        p.core(n.max(1)).validate().map_err(py_err)?;
        Ok(p)
    }

    fn __repr__(&self) -> String {
        format!(
            "ModelParams(alpha={}, beta={}, d0={}, lam={}, omega={}, coupling_scale={}, n={})",
            self.alpha, self.beta, self.d0, self.lam, self.omega, self.coupling_scale, self.n
        )
    }
}

impl PyModelParams {
    fn core(&self, n: usize) -> slsync::ModelParams {
        slsync::ModelParams {
            lambda: self.lam,
            omega: self.omega,
            coupling_scale: self.coupling_scale,
            alpha: self.alpha,
            beta: self.beta,
            d0: self.d0,
            n: if self.n == 0 { n } else { self.n },
        }
    }

    fn for_set(&self, k: &PyCouplingSet) -> PyResult<slsync::ModelParams> {
        let p = self.core(k.0.len());
        if p.n != k.0.len() {
            return Err(PyValueError::new_err(format!("n = {} but the coupling set has {}", p.n, k.0.len())));
        }
        p.validate().map_err(py_err)?;
        Ok(p)
    }
}

/// Runs the mean-field model and returns the measured stationary state.
#[pyfunction]
#[pyo3(signature = (params, couplings, t_transient=500.0, t_measure=100.0, dt=0.01, seed=0, tol_phase=DEFAULT_TOL_PHASE, n_bins=DEFAULT_N_BINS))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    params: &PyModelParams,
    couplings: &PyCouplingSet,
    t_transient: f64,
    t_measure: f64,
    dt: f64,
    seed: u64,
    tol_phase: f64,
    n_bins: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let p = params.for_set(couplings)?;
    let plan = slsync::IntegrationPlan { dt, t_transient, t_measure, seed, ..Default::default() };
    let k = &couplings.0;
    let (m, label) = py
        .detach(|| {
            let traj = simulate_mean_field(&p, k, &plan)?;
            let m = measure(&traj, tol_phase, n_bins);
            let label = slsync::sweep::label_run(&m, &p, k);
            Ok::<_, Error>((m, label))
        })
        .map_err(py_err)?;
    let n = m.partition.n();
    let d = PyDict::new(py);
    d.set_item("R_tilde", m.r_tilde_mean())?;
    d.set_item("Omega", m.series.omega)?;
    d.set_item("Delta", m.series.delta)?;
    d.set_item("state", label.to_string())?;
    d.set_item("locked", (0..n).map(|j| m.partition.is_locked(j)).collect::<Vec<_>>())?;
    d.set_item("phi", m.partition.phi.clone())?;
    d.set_item("r", m.partition.r.clone())?;
    d.set_item("amp_slope", m.amp.mean_slope)?;
    d.set_item("inflection", m.amp.inflection)?;
    Ok(d)
}

/// Solves the self-consistency problem and returns the predicted state.
#[pyfunction]
#[pyo3(signature = (params, couplings, init=None, n_bins=DEFAULT_N_BINS))]
fn predict<'py>(
    py: Python<'py>,
    params: &PyModelParams,
    couplings: &PyCouplingSet,
    init: Option<(f64, f64)>,
    n_bins: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let p = params.for_set(couplings)?;
    let k = &couplings.0;
    let point = py.detach(|| theory::predict_point(&p, k, init, &SolverOptions::default(), n_bins));
    let sol = &point.solution;
    let d = PyDict::new(py);
    d.set_item("R_tilde", sol.r_tilde)?;
    d.set_item("Delta", none_if_nan(sol.delta))?;
    d.set_item("converged", sol.converged)?;
    d.set_item("residual", sol.residual)?;
    d.set_item("state", point.label.to_string())?;
    d.set_item("lock_interval", point.lock_interval)?;
    d.set_item("locked", point.membership.locked.clone())?;
    d.set_item("phi", point.membership.phi_star.clone())?;
    d.set_item("r", point.membership.r_star.clone())?;
    d.set_item("amp_slope", point.amp.mean_slope)?;
    d.set_item("inflection", point.amp.inflection)?;
    Ok(d)
}

/// State label for a population state (R̃, Δ).
#[pyfunction]
fn classify(r_tilde: f64, delta: f64, params: &PyModelParams, couplings: &PyCouplingSet) -> PyResult<String> {
    let p = params.for_set(couplings)?;
    Ok(theory::classify_state(r_tilde, delta, &p, &couplings.0).to_string())
}

/// Stable amplitude of one oscillator: `("locked" | "incoherent" | "collapsed", r)`.
#[pyfunction]
fn solve_amplitude(k: f64, r_tilde: f64, delta: f64, params: &PyModelParams) -> (&'static str, f64) {
    let a = theory::solve_amplitude(k, r_tilde, delta, &params.core(1));
    let kind = match a {
        Amplitude::Locked(_) => "locked",
        Amplitude::Incoherent(_) => "incoherent",
        Amplitude::Collapsed => "collapsed",
    };
    (kind, a.value())
}

fn cell_dict<'py>(py: Python<'py>, alpha: f64, c: &CellRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("alpha", alpha)?;
    d.set_item("beta", c.beta)?;
    d.set_item("d0", c.d0)?;
    d.set_item("R_tilde", none_if_nan(c.r_tilde))?;
    d.set_item("Delta", none_if_nan(c.delta))?;
    d.set_item("amp_slope", none_if_nan(c.amp_slope))?;
    d.set_item("inflection_frac", none_if_nan(c.inflection_frac))?;
    d.set_item("state", c.state.map(|s| s.to_string()))?;
    d.set_item("fully_drifting", c.fully_drifting)?;
    d.set_item("status", c.status.as_str())?;
    Ok(d)
}

/// (β, d₀) grid. Returns `{"simulate": [...], "theory": [...]}` with one
/// dict per cell for whichever modes ran.
#[pyfunction]
#[pyo3(signature = (
    couplings, alpha, beta=(0.0, 0.49 * std::f64::consts::PI, 11), d0=(-2.0, 2.0, 11), mode="simulate",
    seeds=vec![0], t_transient=500.0, t_measure=100.0, dt=0.01,
))]
#[allow(clippy::too_many_arguments)]
fn sweep<'py>(
    py: Python<'py>,
    couplings: &PyCouplingSet,
    alpha: f64,
    beta: (f64, f64, usize),
    d0: (f64, f64, usize),
    mode: &str,
    seeds: Vec<u64>,
    t_transient: f64,
    t_measure: f64,
    dt: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let mode = match mode {
        "simulate" => SweepMode::Simulate,
        "theory" => SweepMode::Theory,
        "both" => SweepMode::Both,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    let spec = SweepSpec {
        alpha,
        beta_range: AxisRange::new(beta.0, beta.1, beta.2),
        d0_range: AxisRange::new(d0.0, d0.1, d0.2),
        seeds,
        mode,
        plan: slsync::IntegrationPlan { dt, t_transient, t_measure, ..Default::default() },
        boundaries: false,
        ..SweepSpec::default()
    };
    let source = CouplingSource::MeanField(couplings.0.clone());
    let result = py.detach(|| run_grid(&spec, &source)).map_err(py_err)?;
    let out = PyDict::new(py);
    for (name, grid) in [("simulate", &result.simulated), ("theory", &result.theory)] {
        if let Some(g) = grid {
            let rows = g.cells.iter().map(|c| cell_dict(py, g.alpha, c)).collect::<PyResult<Vec<_>>>()?;
            out.set_item(name, rows)?;
        }
    }
    Ok(out)
}

#[pymodule]
fn slsync_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCouplingSet>()?;
    m.add_class::<PyModelParams>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(solve_amplitude, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
