//! First-order toy loop `ẏ = F(t) + d + b·(1 − β)·u` under continuous iP
//! control, used to exercise the estimators against a known `F`.

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::control::{ip_control, GainSet, ReferencePoint, UltraLocalModel};
use crate::error::{Error, Result};
use crate::estimation::{algebraic_estimate, closed_loop_estimate, EstimatorConfig, EstimatorKind, SlidingWindow, WindowEntry};
use crate::fault::FaultProfile;
use crate::greenhouse::rk4_step;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DemoSignal {
    Constant { value: f64 },
    Step { before: f64, after: f64, at_s: f64 },
    Sine { offset: f64, amplitude: f64, period_s: f64 },
}

impl DemoSignal {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            DemoSignal::Constant { value } => value,
            DemoSignal::Step { before, after, at_s } => {
                if t < at_s {
                    before
                } else {
                    after
                }
            }
            DemoSignal::Sine {
                offset,
                amplitude,
                period_s,
            } => offset + amplitude * (TAU * t / period_s).sin(),
        }
    }
}

/// Rates (`F`, `k_p`, `b`) are per `time_unit_s` seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoSpec {
    pub signal: DemoSignal,
    pub disturbance: f64,
    pub duration_s: f64,
    pub sample_period_s: f64,
    pub window_samples: usize,
    pub alpha: f64,
    /// True input gain of the toy plant; `alpha` when absent.
    pub plant_gain: Option<f64>,
    pub k_p: f64,
    pub time_unit_s: f64,
    /// Integration steps per sample period.
    pub substeps: usize,
    pub reference: f64,
    pub initial_y: f64,
    pub fault: FaultProfile,
    /// Estimate that drives the controller.
    pub control_estimator: EstimatorKind,
}

impl Default for DemoSpec {
    fn default() -> Self {
        Self {
            signal: DemoSignal::Constant { value: 5.0 },
            disturbance: 0.0,
            duration_s: 3600.0,
            sample_period_s: 60.0,
            window_samples: 7,
            alpha: 1.0,
            plant_gain: None,
            k_p: 2.0,
            time_unit_s: 60.0,
            substeps: 60,
            reference: 0.0,
            initial_y: 0.0,
            fault: FaultProfile::none(),
            control_estimator: EstimatorKind::ClosedLoop,
        }
    }
}

impl DemoSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn tau_s(&self) -> f64 {
        (self.window_samples.saturating_sub(1)) as f64 * self.sample_period_s
    }
}

/// State of the toy loop at one sample instant.
///
/// `f_true` is the term the estimators should converge to: `F̄ = F − αβu`,
/// which is plain `F` without a fault.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemoSample {
    pub t_s: f64,
    pub y: f64,
    pub u: f64,
    pub beta: f64,
    pub f_true: f64,
    pub f_est_algebraic: f64,
    pub f_est_closed_loop: f64,
}

/// Simulates the toy loop and returns one sample per period from the first
/// full window onwards.
///
/// The control law is evaluated continuously with `F̂` held between samples;
/// `F̂` is 0 until the window fills.
pub fn simulate_first_order_loop(spec: &DemoSpec) -> Result<Vec<DemoSample>> {
    if spec.substeps == 0 {
        return Err(Error::config("substeps must be at least 1"));
    }
    if !(spec.duration_s > 0.0) {
        return Err(Error::config("duration must be positive"));
    }
    let model = UltraLocalModel::new(spec.alpha)?;
    let gains = GainSet::proportional(spec.k_p)?;
    let mut window = SlidingWindow::new(spec.window_samples, spec.sample_period_s)?;
    let cfg = EstimatorConfig::with_time_unit(spec.tau_s(), spec.alpha, spec.k_p, spec.time_unit_s)?;
    let b = spec.plant_gain.unwrap_or(spec.alpha);
    let reference = ReferencePoint::constant(spec.reference);
    let law = |f_hat: f64, y: f64| ip_control(f_hat, y, reference, &gains, &model);

    let ts = spec.sample_period_s;
    let h = ts / spec.substeps as f64;
    let periods = (spec.duration_s / ts).round() as usize;
    let mut y = spec.initial_y;
    let mut f_hat = 0.0;
    let mut u_prev = law(0.0, y);
    let mut out = Vec::new();

    for k in 0..=periods {
        let t = k as f64 * ts;
        window.push(WindowEntry {
            t,
            y,
            u: u_prev,
            e: y - spec.reference,
            y_star_dot: 0.0,
        })?;
        if window.is_full() {
            let f_alg = algebraic_estimate(&window, &cfg)?;
            let f_cl = closed_loop_estimate(&window, &cfg)?;
            f_hat = match spec.control_estimator {
                EstimatorKind::ClosedLoop => f_cl,
                EstimatorKind::Algebraic => f_alg,
            };
            let beta = spec.fault.beta_at(t);
            let f = spec.signal.at(t) + spec.disturbance + (b - spec.alpha) * (1.0 - beta) * u_prev;
            out.push(DemoSample {
                t_s: t,
                y,
                u: u_prev,
                beta,
                f_true: f - spec.alpha * beta * u_prev,
                f_est_algebraic: f_alg,
                f_est_closed_loop: f_cl,
            });
        }
        if k == periods {
            break;
        }
        for j in 0..spec.substeps {
            let t0 = t + j as f64 * h;
            let beta = spec.fault.beta_at(t0);
            let rhs = |x: [f64; 2], tt: f64| {
                let u = law(f_hat, x[0]);
                [spec.signal.at(tt) + spec.disturbance + b * (1.0 - beta) * u, 0.0]
            };
            // the signal is evaluated at the sub-step midpoint so steps and
            // sines are resolved to within one sub-step
            let tm = t0 + h / 2.0;
            y = rk4_step([y, 0.0], h / spec.time_unit_s, |x| rhs(x, tm))[0];
        }
        u_prev = law(f_hat, y);
        if !y.is_finite() {
            return Err(Error::IntegratorFault { t: t + ts });
        }
    }
    Ok(out)
}

/// Writes `t_s,f_true,f_est_algebraic,f_est_closed_loop` rows.
pub fn write_demo_csv<W: std::io::Write>(samples: &[DemoSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t_s", "f_true", "f_est_algebraic", "f_est_closed_loop"])?;
    for s in samples {
        w.write_record([
            s.t_s.to_string(),
            s.f_true.to_string(),
            s.f_est_algebraic.to_string(),
            s.f_est_closed_loop.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<demo output>", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_f_is_recovered() {
        let out = simulate_first_order_loop(&DemoSpec::default()).unwrap();
        assert_eq!(out[0].t_s, 360.0);
        let last = out.last().unwrap();
        assert!((last.f_est_closed_loop - 5.0).abs() < 1e-6, "{last:?}");
        assert!((last.f_est_algebraic - 5.0).abs() < 1e-6, "{last:?}");
        assert!(last.y.abs() < 1e-4);
    }

    #[test]
    fn spec_parses_with_defaults() {
        let spec: DemoSpec =
            serde_json::from_str(r#"{"signal": {"kind": "sine", "offset": 1, "amplitude": 2, "period_s": 600}}"#)
                .unwrap();
        assert_eq!(spec.window_samples, 7);
        assert_eq!(spec.tau_s(), 360.0);
        assert!((spec.signal.at(150.0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn csv_header() {
        let out = simulate_first_order_loop(&DemoSpec {
            duration_s: 600.0,
            ..DemoSpec::default()
        })
        .unwrap();
        let mut buf = Vec::new();
        write_demo_csv(&out, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t_s,f_true,f_est_algebraic,f_est_closed_loop\n"));
        assert_eq!(text.lines().count(), 1 + out.len());
    }
}
