//! Python bindings: controller laws, the sliding-window estimators, actuation
//! helpers and the scenario runner.

use mfc_core::actuation::{self, DutyCycle};
use mfc_core::greenhouse::{ReferenceSchedule, Species};
use mfc_core::harness::{self, DemoSpec, Scenario};
use mfc_core::{EstimatorConfig, EstimatorKind, GainSet, ReferencePoint, UltraLocalModel, WindowEntry};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: mfc_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_kind(kind: &str) -> PyResult<EstimatorKind> {
    match kind {
        "closed_loop" => Ok(EstimatorKind::ClosedLoop),
        "algebraic" => Ok(EstimatorKind::Algebraic),
        other => Err(PyValueError::new_err(format!(
            "unknown estimator `{other}`, expected closed_loop or algebraic"
        ))),
    }
}

/// Fixed-length window of uniformly spaced samples.
#[pyclass(name = "SlidingWindow")]
struct PySlidingWindow {
    inner: mfc_core::SlidingWindow,
}

#[pymethods]
impl PySlidingWindow {
    #[new]
    fn new(capacity: usize, sample_period: f64) -> PyResult<Self> {
        Ok(Self {
            inner: mfc_core::SlidingWindow::new(capacity, sample_period).map_err(py_err)?,
        })
    }

    #[pyo3(signature = (t, y, u, e, y_star_dot = 0.0))]
    fn push(&mut self, t: f64, y: f64, u: f64, e: f64, y_star_dot: f64) -> PyResult<()> {
        self.inner
            .push(WindowEntry {
                t,
                y,
                u,
                e,
                y_star_dot,
            })
            .map_err(py_err)
    }

    fn is_full(&self) -> bool {
        self.inner.is_full()
    }

    fn span(&self) -> f64 {
        self.inner.span()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Estimate of F; raises while the window is not full.
    #[pyo3(signature = (kind, alpha, k_p, time_unit = 1.0))]
    fn estimate(&self, kind: &str, alpha: f64, k_p: f64, time_unit: f64) -> PyResult<f64> {
        let cfg = EstimatorConfig::with_time_unit(self.inner.span(), alpha, k_p, time_unit).map_err(py_err)?;
        parse_kind(kind)?.estimate(&self.inner, &cfg).map_err(py_err)
    }
}

/// `u = −(F − ẏ* + K_P·e) / α`.
#[pyfunction]
#[pyo3(signature = (f_est, y, y_ref, k_p, alpha, y_ref_dot = 0.0))]
fn ip_control(f_est: f64, y: f64, y_ref: f64, k_p: f64, alpha: f64, y_ref_dot: f64) -> PyResult<f64> {
    let gains = GainSet::proportional(k_p).map_err(py_err)?;
    let model = UltraLocalModel::new(alpha).map_err(py_err)?;
    let reference = ReferencePoint {
        value: y_ref,
        derivative: y_ref_dot,
    };
    Ok(mfc_core::ip_control(f_est, y, reference, &gains, &model))
}

#[pyfunction]
fn predict_error(e0: f64, k_p: f64, t: f64) -> PyResult<f64> {
    mfc_core::predict_error(e0, k_p, t).map_err(py_err)
}

#[pyfunction]
fn to_duty(u: f64) -> PyResult<f64> {
    actuation::to_duty(u).map(DutyCycle::value).map_err(py_err)
}

#[pyfunction]
fn pwm_waveform(duty: f64, period: f64, resolution: f64) -> PyResult<Vec<bool>> {
    let duty = actuation::to_duty(duty).map_err(py_err)?;
    actuation::pwm_waveform(duty, period, resolution).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (species, weeks_after_plant, is_day = false))]
fn reference_at(species: &str, weeks_after_plant: f64, is_day: bool) -> PyResult<f64> {
    let species: Species = species.parse().map_err(py_err)?;
    ReferenceSchedule::standard()
        .reference_at(species, weeks_after_plant, is_day)
        .map_err(py_err)
}

/// Runs a scenario given as a JSON string.
///
/// Returns a dict with `metrics` (JSON string) and `series`, a dict of column
/// name to list of floats.
#[pyfunction]
fn run_scenario<'py>(py: Python<'py>, scenario_json: &str) -> PyResult<Bound<'py, PyDict>> {
    let scenario: Scenario =
        serde_json::from_str(scenario_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let out = harness::run_scenario(&scenario).map_err(py_err)?;
    let metrics = serde_json::to_string(&out.metrics).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let series = PyDict::new(py);
    let r = &out.records;
    let columns: [(&str, fn(&harness::RunRecord) -> f64); 8] = [
        ("t_s", |x| x.t_s),
        ("ti_c", |x| x.ti_c),
        ("hi_pct", |x| x.hi_pct),
        ("ti_ref_c", |x| x.ti_ref_c),
        ("duty_heat", |x| x.duty_heat),
        ("duty_fog", |x| x.duty_fog),
        ("f_est_temp", |x| x.f_est_temp),
        ("beta", |x| x.beta),
    ];
    for (name, get) in columns {
        series.set_item(name, r.iter().map(get).collect::<Vec<f64>>())?;
    }
    let result = PyDict::new(py);
    result.set_item("metrics", metrics)?;
    result.set_item("series", series)?;
    Ok(result)
}

/// Runs the first-order estimator demo given as a JSON string.
#[pyfunction]
fn estimate_demo<'py>(py: Python<'py>, spec_json: &str) -> PyResult<Bound<'py, PyDict>> {
    let spec: DemoSpec = serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let samples = harness::simulate_first_order_loop(&spec).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("t_s", samples.iter().map(|s| s.t_s).collect::<Vec<_>>())?;
    out.set_item("f_true", samples.iter().map(|s| s.f_true).collect::<Vec<_>>())?;
    out.set_item("f_est_algebraic", samples.iter().map(|s| s.f_est_algebraic).collect::<Vec<_>>())?;
    out.set_item("f_est_closed_loop", samples.iter().map(|s| s.f_est_closed_loop).collect::<Vec<_>>())?;
    Ok(out)
}

#[pymodule]
fn mfc_greenhouse(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySlidingWindow>()?;
    m.add_function(wrap_pyfunction!(ip_control, m)?)?;
    m.add_function(wrap_pyfunction!(predict_error, m)?)?;
    m.add_function(wrap_pyfunction!(to_duty, m)?)?;
    m.add_function(wrap_pyfunction!(pwm_waveform, m)?)?;
    m.add_function(wrap_pyfunction!(reference_at, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_demo, m)?)?;
    Ok(())
}
