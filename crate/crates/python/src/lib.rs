//! Python bindings for the transonic shock solver.

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use shocknozzle::io::{self as sio, SolverConfig};
use shocknozzle::{
    BackgroundSolution, Error, ExitPerturbation, ExitProfile, FlowState, ForceField, GasModel, IterationOptions,
    IterationReport, NozzleSetup, PerturbationState, ShockProblem,
};

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e.exit_code() {
        4 => PyOSError::new_err(msg),
        3 => PyRuntimeError::new_err(msg),
        _ => PyValueError::new_err(msg),
    }
}

fn rows(a: &ndarray::Array2<f64>) -> Vec<Vec<f64>> {
    a.outer_iter().map(|r| r.to_vec()).collect()
}

#[pyclass(name = "GasModel", frozen, from_py_object)]
#[derive(Clone)]
struct PyGasModel {
    inner: GasModel,
}

#[pymethods]
impl PyGasModel {
    #[new]
    #[pyo3(signature = (gamma, entropy_const = 1.0))]
    fn new(gamma: f64, entropy_const: f64) -> PyResult<Self> {
        Ok(PyGasModel { inner: GasModel::new(gamma, entropy_const).map_err(to_py)? })
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    #[getter]
    fn entropy_const(&self) -> f64 {
        self.inner.entropy_const
    }

    fn pressure(&self, rho: f64) -> PyResult<f64> {
        self.inner.pressure(rho).map_err(to_py)
    }

    fn sound_speed_sq(&self, rho: f64) -> PyResult<f64> {
        self.inner.sound_speed_sq(rho).map_err(to_py)
    }

    /// Normal shock: returns the downstream `(rho, u)`.
    fn rh_jump(&self, rho: f64, u: f64) -> PyResult<(f64, f64)> {
        let up = FlowState::axial(rho, u).map_err(to_py)?;
        let down = shocknozzle::rh_jump(&up, &self.inner).map_err(to_py)?;
        Ok((down.rho, down.u1))
    }

    fn __repr__(&self) -> String {
        format!("GasModel(gamma={}, entropy_const={})", self.inner.gamma, self.inner.entropy_const)
    }
}

#[pyclass(name = "Nozzle", frozen, from_py_object)]
#[derive(Clone)]
struct PyNozzle {
    inner: NozzleSetup,
}

#[pymethods]
impl PyNozzle {
    /// Nozzle `[l0, l1]` with inlet state `(rho0, u0)` and force polynomial `force`.
    #[new]
    #[pyo3(signature = (l0, l1, rho0, u0, gas, force))]
    fn new(l0: f64, l1: f64, rho0: f64, u0: f64, gas: &PyGasModel, force: Vec<f64>) -> PyResult<Self> {
        let setup = NozzleSetup::new(l0, l1, rho0, u0, gas.inner, ForceField::new(force, 0.0)).map_err(to_py)?;
        Ok(PyNozzle { inner: setup })
    }

    fn exit_pressure_of_shock(&self, ls: f64) -> PyResult<f64> {
        self.inner.exit_pressure_of_shock(ls).map_err(to_py)
    }

    /// `(P1, P0)`: exit pressures with the shock at the exit and at the inlet.
    fn pressure_window(&self) -> PyResult<(f64, f64)> {
        let w = self.inner.pressure_window().map_err(to_py)?;
        Ok((w.p1, w.p0))
    }

    fn solve_shock_position(&self, pe: f64) -> PyResult<PyBackground> {
        Ok(PyBackground { inner: self.inner.solve_shock_position(pe).map_err(to_py)? })
    }

    fn background_at(&self, ls: f64) -> PyResult<PyBackground> {
        Ok(PyBackground { inner: BackgroundSolution::with_shock_at(&self.inner, ls).map_err(to_py)? })
    }
}

#[pyclass(name = "Background", frozen, from_py_object)]
#[derive(Clone)]
struct PyBackground {
    inner: BackgroundSolution,
}

#[pymethods]
impl PyBackground {
    #[getter]
    fn ls(&self) -> f64 {
        self.inner.ls
    }

    #[getter]
    fn exit_pressure(&self) -> f64 {
        self.inner.exit_pressure
    }

    #[getter]
    fn mass_flux(&self) -> f64 {
        self.inner.mass_flux
    }

    /// `(rho, u)` just upstream and downstream of the shock.
    fn shock_states(&self) -> ((f64, f64), (f64, f64)) {
        let (m, p) = (self.inner.pre_shock(), self.inner.post_shock());
        ((m.rho, m.u1), (p.rho, p.u1))
    }

    fn rh_residuals(&self) -> (f64, f64) {
        self.inner.rh_residuals()
    }

    /// `(x, rho, u)` samples of the supersonic branch.
    fn supersonic(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let b = &self.inner.supersonic;
        (b.grid.clone(), b.rho.clone(), b.u.clone())
    }

    /// `(x, rho, u)` samples of the subsonic branch.
    fn subsonic(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let b = &self.inner.subsonic;
        (b.grid.clone(), b.rho.clone(), b.u.clone())
    }
}

#[pyclass(name = "Solution", frozen, from_py_object)]
#[derive(Clone)]
struct PySolution {
    state: PerturbationState,
    report: IterationReport,
    epsilon: f64,
}

#[pymethods]
impl PySolution {
    #[getter]
    fn v1(&self) -> Vec<Vec<f64>> {
        rows(&self.state.v1)
    }

    #[getter]
    fn v2(&self) -> Vec<Vec<f64>> {
        rows(&self.state.v2)
    }

    #[getter]
    fn v3(&self) -> Vec<Vec<f64>> {
        rows(&self.state.v3)
    }

    #[getter]
    fn v4(&self) -> Vec<f64> {
        self.state.v4.clone()
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.epsilon
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.report.iterations
    }

    #[getter]
    fn contraction_ratios(&self) -> Vec<f64> {
        self.report.contraction_ratios.clone()
    }

    #[getter]
    fn compatible(&self) -> bool {
        self.report.compatibility.passed
    }

    /// Final residuals as a dict.
    fn residuals<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        if let Some(r) = &self.report.final_residuals {
            d.set_item("interior", r.interior)?;
            d.set_item("rh_exact", r.rh_exact)?;
            d.set_item("rh_fields", r.rh_fields)?;
            d.set_item("exit_pressure", r.exit_pressure)?;
            d.set_item("shock_slope", r.shock_slope)?;
            d.set_item("wall", r.wall)?;
            d.set_item("entropy_ok", r.entropy_ok)?;
        }
        Ok(d)
    }
}

#[pyclass(name = "ShockProblem", frozen)]
struct PyShockProblem {
    inner: ShockProblem,
}

#[pymethods]
impl PyShockProblem {
    #[new]
    #[pyo3(signature = (background, n1, n2, tol_fp = 1e-10, max_iter = 50))]
    fn new(background: &PyBackground, n1: usize, n2: usize, tol_fp: f64, max_iter: usize) -> PyResult<Self> {
        let opts = IterationOptions { tol_fp, max_iter, ..Default::default() };
        Ok(PyShockProblem { inner: ShockProblem::new(background.inner.clone(), n1, n2, opts).map_err(to_py)? })
    }

    #[getter]
    fn y1(&self) -> Vec<f64> {
        self.inner.grid.y1.clone()
    }

    #[getter]
    fn y2(&self) -> Vec<f64> {
        self.inner.grid.y2.clone()
    }

    /// Fixed-point solve for exit perturbation `epsilon * profile`; the profile is
    /// `cos(k pi (y2 + 1))` unless explicit node samples are given.
    #[pyo3(signature = (epsilon, k = 1, samples = None))]
    fn iterate(&self, py: Python<'_>, epsilon: f64, k: u32, samples: Option<Vec<f64>>) -> PyResult<PySolution> {
        let profile = match samples {
            Some(values) => ExitProfile::Samples { values },
            None => ExitProfile::Cosine { k },
        };
        let p = &self.inner;
        let (state, report) = py
            .detach(|| ExitPerturbation::new(epsilon, &profile, &p.grid).and_then(|e| p.iterate(&e)))
            .map_err(to_py)?;
        Ok(PySolution { state, report, epsilon })
    }

    /// Physical fields of a solution as a dict of nested lists.
    fn to_physical<'py>(&self, py: Python<'py>, solution: &PySolution) -> PyResult<Bound<'py, PyDict>> {
        let f = self.inner.to_physical(&solution.state).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("x1", rows(&f.x1))?;
        d.set_item("x2", f.x2)?;
        d.set_item("u1", rows(&f.u1))?;
        d.set_item("u2", rows(&f.u2))?;
        d.set_item("rho", rows(&f.rho))?;
        d.set_item("pressure", rows(&f.pressure))?;
        d.set_item("bernoulli", rows(&f.bernoulli))?;
        d.set_item("shock", f.shock)?;
        Ok(d)
    }
}

/// Runs one CLI command (`background`, `window`, `perturb`, `sweep`, `coeffs`)
/// from a TOML file and returns its summary lines.
#[pyfunction]
#[pyo3(signature = (command, config, out = None))]
fn run(py: Python<'_>, command: &str, config: PathBuf, out: Option<PathBuf>) -> PyResult<Vec<String>> {
    let mut cfg = SolverConfig::load(&config).map_err(to_py)?;
    if let Some(dir) = out {
        cfg.output.dir = dir;
    }
    let bundle = py
        .detach(|| match command {
            "background" => sio::cmd_background(&cfg),
            "window" => sio::cmd_window(&cfg, 11),
            "perturb" => sio::cmd_perturb(&cfg),
            "sweep" => sio::cmd_sweep(&cfg),
            "coeffs" => sio::cmd_coeffs(&cfg),
            other => Err(Error::Config(format!("unknown command {other:?}"))),
        })
        .map_err(to_py)?;
    Ok(bundle.summary)
}

/// Re-checks a result directory; returns `(passed, [(name, passed, detail), ...])`.
#[pyfunction]
fn verify(path: PathBuf) -> PyResult<(bool, Vec<(String, bool, String)>)> {
    let r = sio::cmd_verify(&path).map_err(to_py)?;
    Ok((r.passed, r.checks.into_iter().map(|c| (c.name, c.passed, c.detail)).collect()))
}

#[pymodule]
fn shocknozzle_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGasModel>()?;
    m.add_class::<PyNozzle>()?;
    m.add_class::<PyBackground>()?;
    m.add_class::<PyShockProblem>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
