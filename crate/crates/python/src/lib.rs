//! Python bindings for the bmvsim core library.

// pyo3's argument extraction trips this lint inside #[pyfunction] expansions.
#![allow(clippy::useless_conversion)]

use bmvsim::config::{OutputFormat, RunConfig};
use bmvsim::dynamics;
use bmvsim::entanglement;
use bmvsim::error::Error;
use bmvsim::gravity_phase;
use bmvsim::interferometer;
use bmvsim::noise::{self, NoiseParams};
use bmvsim::output;
use bmvsim::{default_constants, PhaseMatrix as CorePhaseMatrix};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    if e.is_config() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn load(config: Option<&str>) -> PyResult<RunConfig> {
    match config {
        Some(text) => RunConfig::from_toml_str(text).map_err(to_py),
        None => Ok(RunConfig::reference()),
    }
}

#[pyclass(name = "PendulumConfig", frozen)]
#[derive(Clone)]
struct PyPendulumConfig {
    inner: dynamics::PendulumConfig,
}

#[pymethods]
impl PyPendulumConfig {
    #[new]
    #[pyo3(signature = (length, initial_angle=0.0, initial_angular_velocity=0.0, local_gravity=9.81))]
    fn new(length: f64, initial_angle: f64, initial_angular_velocity: f64, local_gravity: f64) -> PyResult<Self> {
        let constants = default_constants().with_local_gravity(local_gravity);
        dynamics::PendulumConfig::new(length, initial_angle, initial_angular_velocity, constants)
            .map(|inner| PyPendulumConfig { inner })
            .map_err(to_py)
    }

    #[getter]
    fn length(&self) -> f64 {
        self.inner.length
    }

    #[getter]
    fn initial_angle(&self) -> f64 {
        self.inner.initial_angle
    }

    fn period(&self) -> f64 {
        self.inner.period()
    }

    fn angular_frequency(&self) -> f64 {
        self.inner.angular_frequency()
    }

    fn trajectory_deviation(&self, t: f64) -> PyResult<f64> {
        dynamics::trajectory_deviation(&self.inner, t).map_err(to_py)
    }

    /// Arc displacement at each time under the chosen model.
    #[pyo3(signature = (times, model="small_angle_closed_form"))]
    fn positions(&self, times: Vec<f64>, model: &str) -> PyResult<Vec<f64>> {
        let model = match model {
            "free_fall" => dynamics::TrajectoryModel::FreeFall,
            "small_angle_closed_form" | "small_angle" => dynamics::TrajectoryModel::SmallAngleClosedForm,
            "exact_pendulum_ode" | "exact" => dynamics::TrajectoryModel::ExactPendulumOde,
            other => return Err(PyValueError::new_err(format!("unknown model {other:?}"))),
        };
        let horizon = times.iter().copied().fold(0.0, f64::max);
        let trajectory = dynamics::base_trajectory(model, &self.inner, &Default::default(), horizon).map_err(to_py)?;
        Ok(times.iter().map(|&t| trajectory.position(t)).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "PendulumConfig(length={}, initial_angle={})",
            self.inner.length, self.inner.initial_angle
        )
    }
}

#[pyclass(name = "PhaseMatrix", frozen)]
#[derive(Clone)]
struct PyPhaseMatrix {
    inner: CorePhaseMatrix,
}

#[pymethods]
impl PyPhaseMatrix {
    #[new]
    fn new(phi_ll: f64, phi_lr: f64, phi_rl: f64, phi_rr: f64) -> Self {
        PyPhaseMatrix {
            inner: CorePhaseMatrix::from_phases(phi_ll, phi_lr, phi_rl, phi_rr),
        }
    }

    #[getter]
    fn phases(&self) -> (f64, f64, f64, f64) {
        let m = &self.inner;
        (m.phi_ll, m.phi_lr, m.phi_rl, m.phi_rr)
    }

    fn entangling_phase(&self) -> f64 {
        self.inner.entangling_phase()
    }

    fn two_term_phase(&self) -> f64 {
        self.inner.two_term_phase()
    }

    fn negativity(&self) -> f64 {
        entanglement::negativity(&entanglement::build_state(&self.inner))
    }

    fn visibility(&self) -> f64 {
        entanglement::visibility(self.inner.entangling_phase())
    }

    fn __repr__(&self) -> String {
        let (a, b, c, d) = self.phases();
        format!("PhaseMatrix(phi_ll={a}, phi_lr={b}, phi_rl={c}, phi_rr={d})")
    }
}

#[pyfunction]
#[pyo3(signature = (length, local_gravity=9.81))]
fn period(length: f64, local_gravity: f64) -> PyResult<f64> {
    let constants = default_constants().with_local_gravity(local_gravity);
    let config = dynamics::PendulumConfig::new(length, 0.0, 0.0, constants).map_err(to_py)?;
    Ok(dynamics::period(&config))
}

#[pyfunction]
fn branch_separation(spin_acceleration: f64, total_time: f64) -> f64 {
    interferometer::branch_separation(spin_acceleration, total_time)
}

#[pyfunction]
fn required_angle(separation: f64, length: f64) -> f64 {
    interferometer::required_angle(separation, length)
}

#[pyfunction]
fn interaction_potential(mass: f64, r: f64) -> PyResult<f64> {
    gravity_phase::interaction_potential(mass, r, &default_constants()).map_err(to_py)
}

#[pyfunction]
fn thermal_rms(temperature: f64, mode_frequency: f64, effective_mass: f64) -> PyResult<f64> {
    let params = NoiseParams {
        temperature,
        mode_frequency,
        effective_mass,
        superposition_scale: 1.0,
    };
    params.validate().map_err(to_py)?;
    Ok(noise::thermal_rms(&params, &default_constants()))
}

#[pyfunction]
fn phase_correction(delta_phi_free: f64, t: f64, period: f64) -> f64 {
    entanglement::phase_correction(delta_phi_free, t, period)
}

#[pyfunction]
fn visibility(delta_phi: f64) -> f64 {
    entanglement::visibility(delta_phi)
}

/// Returns (v_free, v_pend, bound).
#[pyfunction]
fn corrected_visibility(delta_phi_free: f64, t: f64, period: f64) -> (f64, f64, f64) {
    let v = entanglement::corrected_visibility(delta_phi_free, t, period);
    (v.v_free, v.v_pend, v.bound)
}

/// Full protocol evaluation; returns the result document as JSON.
#[pyfunction]
#[pyo3(signature = (config=None))]
fn simulate(config: Option<&str>) -> PyResult<String> {
    let config = load(config)?;
    let result = bmvsim::simulate(&config).map_err(to_py)?;
    output::result_to_json(&result).map_err(to_py)
}

/// Runs the `[sweep]` section and returns the table as CSV or JSON text.
#[pyfunction]
#[pyo3(signature = (config=None, format="csv"))]
fn run_sweep(py: Python<'_>, config: Option<&str>, format: &str) -> PyResult<String> {
    let config = load(config)?;
    let format: OutputFormat = format.parse().map_err(to_py)?;
    let spec = config.sweep_spec().map_err(to_py)?;
    let records = py.allow_threads(|| bmvsim::run_sweep(&spec)).map_err(to_py)?;
    match format {
        OutputFormat::Csv => output::records_to_csv(&records),
        OutputFormat::Json => output::records_to_json(&records),
    }
    .map_err(to_py)
}

/// Returns (all_pass, table).
#[pyfunction]
#[pyo3(signature = (config=None))]
fn verify(py: Python<'_>, config: Option<&str>) -> PyResult<(bool, String)> {
    let config = load(config)?;
    let report = py.allow_threads(|| bmvsim::verify(&config)).map_err(to_py)?;
    Ok((report.all_pass(), report.table()))
}

#[pyfunction]
fn reference_config() -> &'static str {
    bmvsim::config::REFERENCE_CONFIG
}

#[pymodule]
fn bmvsim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPendulumConfig>()?;
    m.add_class::<PyPhaseMatrix>()?;
    m.add_function(wrap_pyfunction!(period, m)?)?;
    m.add_function(wrap_pyfunction!(branch_separation, m)?)?;
    m.add_function(wrap_pyfunction!(required_angle, m)?)?;
    m.add_function(wrap_pyfunction!(interaction_potential, m)?)?;
    m.add_function(wrap_pyfunction!(thermal_rms, m)?)?;
    m.add_function(wrap_pyfunction!(phase_correction, m)?)?;
    m.add_function(wrap_pyfunction!(visibility, m)?)?;
    m.add_function(wrap_pyfunction!(corrected_visibility, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(reference_config, m)?)?;
    Ok(())
}
