//! Python bindings. Structured results come back as plain dicts and lists.

use hjlab_core::ergodic::{estimate_lambda_min as lambda_min, ErgodicOptions};
use hjlab_core::experiments::{run_experiment as run, EXPERIMENTS};
use hjlab_core::fd::{evolve_lf, EvolveConfig, Flux};
use hjlab_core::{
    backtrack_minimizer, check_h4 as h4, hopf_lax_solve, Extension, Grid1D, HamiltonianSpec,
    HjError, SampledFn,
};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

fn to_py(e: HjError) -> PyErr {
    match e {
        HjError::InvalidInput(_) | HjError::Config(_) | HjError::UnknownExperiment(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_object<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A Hamiltonian `H(x, p)` from one of the built-in families.
#[pyclass(name = "Hamiltonian", frozen)]
struct PyHamiltonian {
    spec: HamiltonianSpec,
}

#[pymethods]
impl PyHamiltonian {
    /// `−drift·p + ½p²`.
    #[staticmethod]
    #[pyo3(signature = (drift = 0.0))]
    fn quadratic(drift: f64) -> Self {
        Self {
            spec: HamiltonianSpec::quadratic(drift),
        }
    }

    /// `|p − c|`.
    #[staticmethod]
    fn eikonal_shift(c: f64) -> Self {
        Self {
            spec: HamiltonianSpec::eikonal_shift(c),
        }
    }

    /// `|p + α| − |α|`.
    #[staticmethod]
    fn abs_shift(alpha: f64) -> Self {
        Self {
            spec: HamiltonianSpec::abs_shift(alpha),
        }
    }

    /// `p² − ε f(x)` with `f` sampled uniformly on `[x_min, x_max]`.
    #[staticmethod]
    fn quad_potential(eps: f64, x_min: f64, x_max: f64, f: Vec<f64>) -> PyResult<Self> {
        let f = sampled(x_min, x_max, f, Extension::Constant)?;
        Ok(Self {
            spec: HamiltonianSpec::quad_potential(eps, f),
        })
    }

    /// `H − λ`.
    fn shifted(&self, lam: f64) -> Self {
        Self {
            spec: self.spec.clone().shifted(lam),
        }
    }

    #[getter]
    fn label(&self) -> String {
        self.spec.label()
    }

    fn __call__(&self, x: f64, p: f64) -> f64 {
        self.spec.eval(x, p)
    }

    fn __repr__(&self) -> String {
        format!("Hamiltonian({})", self.spec.label())
    }
}

fn sampled(x_min: f64, x_max: f64, values: Vec<f64>, ext: Extension) -> PyResult<SampledFn> {
    let grid = Grid1D::new(x_min, x_max, values.len()).map_err(to_py)?;
    SampledFn::from_values(grid, values, ext).map_err(to_py)
}

/// Hopf-Lax value, minimizer and uniqueness flag at each `x` for time `t`.
#[pyfunction]
fn hopf_lax<'py>(
    py: Python<'py>,
    h: &PyHamiltonian,
    x_min: f64,
    x_max: f64,
    u0: Vec<f64>,
    xs: Vec<f64>,
    t: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let u0 = sampled(x_min, x_max, u0, Extension::LinearExtrapolate)?;
    let pts = xs
        .iter()
        .map(|&x| hopf_lax_solve(&h.spec, &u0, x, t))
        .collect::<Result<Vec<_>, _>>()
        .map_err(to_py)?;
    to_object(py, &pts)
}

/// Backward characteristic ending at `(x, t)`.
#[pyfunction]
fn trajectory<'py>(
    py: Python<'py>,
    h: &PyHamiltonian,
    x_min: f64,
    x_max: f64,
    u0: Vec<f64>,
    x: f64,
    t: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let u0 = sampled(x_min, x_max, u0, Extension::LinearExtrapolate)?;
    to_object(py, &backtrack_minimizer(&h.spec, &u0, x, t).map_err(to_py)?)
}

/// Monotone finite-difference evolution of `u0` on a uniform grid.
#[pyfunction]
#[pyo3(signature = (h, x_min, x_max, u0, t_end, snapshots = None, theta = None, godunov = false))]
#[allow(clippy::too_many_arguments)]
fn evolve<'py>(
    py: Python<'py>,
    h: &PyHamiltonian,
    x_min: f64,
    x_max: f64,
    u0: Vec<f64>,
    t_end: f64,
    snapshots: Option<Vec<f64>>,
    theta: Option<f64>,
    godunov: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let grid = Grid1D::new(x_min, x_max, u0.len()).map_err(to_py)?;
    let u0 = SampledFn::from_values(grid, u0, Extension::LinearExtrapolate).map_err(to_py)?;
    let mut cfg = EvolveConfig::new(grid, t_end).with_snapshots(snapshots.unwrap_or_default());
    cfg.theta = theta;
    if godunov {
        cfg = cfg.with_flux(Flux::Godunov);
    }
    let res = py.detach(|| evolve_lf(&h.spec, &u0, &cfg)).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("dt", res.dt)?;
    out.set_item("theta", res.theta)?;
    out.set_item("steps", res.steps)?;
    out.set_item(
        "times",
        res.snapshots.iter().map(|s| s.time).collect::<Vec<_>>(),
    )?;
    out.set_item(
        "values",
        res.snapshots
            .iter()
            .map(|s| s.u.values().to_vec())
            .collect::<Vec<_>>(),
    )?;
    out.set_item("m", res.m_series)?;
    Ok(out)
}

/// Bracket for the smallest `λ` with a solution of `H = λ` on large balls.
#[pyfunction]
#[pyo3(signature = (h, radii = None, lambda_tol = None))]
fn estimate_lambda_min<'py>(
    py: Python<'py>,
    h: &PyHamiltonian,
    radii: Option<Vec<f64>>,
    lambda_tol: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let mut opts = ErgodicOptions::default();
    if let Some(r) = radii {
        opts.radii = r;
    }
    if let Some(tol) = lambda_tol {
        opts.lambda_tol = tol;
    }
    let rep = py.detach(|| lambda_min(&h.spec, &opts)).map_err(to_py)?;
    to_object(py, &rep)
}

/// Sampled strong-convexity check on `[−K, K]²`.
#[pyfunction]
#[pyo3(signature = (h, eta, k_box, samples = 4096))]
fn check_h4<'py>(
    py: Python<'py>,
    h: &PyHamiltonian,
    eta: f64,
    k_box: f64,
    samples: usize,
) -> PyResult<Bound<'py, PyAny>> {
    to_object(py, &h4(&h.spec, eta, k_box, samples).map_err(to_py)?)
}

/// Runs a named experiment with optional config overrides (a dict).
#[pyfunction]
#[pyo3(signature = (name, overrides = None))]
fn run_experiment<'py>(
    py: Python<'py>,
    name: &str,
    overrides: Option<Bound<'py, PyAny>>,
) -> PyResult<Bound<'py, PyAny>> {
    let overrides = match overrides {
        Some(o) => {
            let text: String = py.import("json")?.call_method1("dumps", (o,))?.extract()?;
            serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))?
        }
        None => serde_json::Value::Null,
    };
    let rep = py.detach(|| run(name, &overrides)).map_err(to_py)?;
    to_object(py, &rep)
}

#[pyfunction]
fn experiments() -> Vec<&'static str> {
    EXPERIMENTS.to_vec()
}

#[pymodule]
fn hjlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHamiltonian>()?;
    m.add_function(wrap_pyfunction!(hopf_lax, m)?)?;
    m.add_function(wrap_pyfunction!(trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_lambda_min, m)?)?;
    m.add_function(wrap_pyfunction!(check_h4, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(experiments, m)?)?;
    Ok(())
}
