use std::thread;

use serde::{Deserialize, Serialize};

use super::runner::{run_scenario, RunMetrics, RunOutput};
use super::scenario::{ControllerKind, Scenario};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub controller: ControllerKind,
    pub temperature_mean_error: f64,
    pub temperature_variance: f64,
    pub hygrometry_mean_error: f64,
    pub hygrometry_variance: f64,
    pub temperature_in_band_fraction: f64,
    pub heating_on_time_min: f64,
    pub fog_on_time_min: f64,
}

impl From<&RunMetrics> for RunSummary {
    fn from(m: &RunMetrics) -> Self {
        Self {
            name: m.name.clone(),
            controller: m.controller,
            temperature_mean_error: m.temperature.mean_error,
            temperature_variance: m.temperature.variance,
            hygrometry_mean_error: m.hygrometry.mean_error,
            hygrometry_variance: m.hygrometry.variance,
            temperature_in_band_fraction: m.temperature_in_band_fraction,
            heating_on_time_min: m.heating_on_time_min,
            fog_on_time_min: m.fog_on_time_min,
        }
    }
}

/// Which run did better on one figure; lower is better everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    A,
    B,
    Tie,
}

impl Verdict {
    fn lower(a: f64, b: f64) -> Self {
        if (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0) {
            Verdict::Tie
        } else if a < b {
            Verdict::A
        } else {
            Verdict::B
        }
    }
}

/// `a − b` for each figure. Mean errors are compared in absolute value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deltas {
    pub temperature_abs_mean_error: f64,
    pub temperature_variance: f64,
    pub hygrometry_abs_mean_error: f64,
    pub hygrometry_variance: f64,
    pub heating_on_time_min: f64,
    /// `|a − b| / min(a, b)`; 0 when both are 0.
    pub heating_on_time_relative: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub temperature_mean: Verdict,
    pub temperature_variance: Verdict,
    pub hygrometry_mean: Verdict,
    pub hygrometry_variance: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub a: RunSummary,
    pub b: RunSummary,
    pub deltas: Deltas,
    pub verdicts: Verdicts,
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let low = a.min(b);
    if a == b {
        0.0
    } else if low <= 0.0 {
        f64::INFINITY
    } else {
        (a - b).abs() / low
    }
}

pub fn compare_metrics(a: &RunMetrics, b: &RunMetrics) -> Comparison {
    let (a, b) = (RunSummary::from(a), RunSummary::from(b));
    let deltas = Deltas {
        temperature_abs_mean_error: a.temperature_mean_error.abs() - b.temperature_mean_error.abs(),
        temperature_variance: a.temperature_variance - b.temperature_variance,
        hygrometry_abs_mean_error: a.hygrometry_mean_error.abs() - b.hygrometry_mean_error.abs(),
        hygrometry_variance: a.hygrometry_variance - b.hygrometry_variance,
        heating_on_time_min: a.heating_on_time_min - b.heating_on_time_min,
        heating_on_time_relative: relative_gap(a.heating_on_time_min, b.heating_on_time_min),
    };
    let verdicts = Verdicts {
        temperature_mean: Verdict::lower(a.temperature_mean_error.abs(), b.temperature_mean_error.abs()),
        temperature_variance: Verdict::lower(a.temperature_variance, b.temperature_variance),
        hygrometry_mean: Verdict::lower(a.hygrometry_mean_error.abs(), b.hygrometry_mean_error.abs()),
        hygrometry_variance: Verdict::lower(a.hygrometry_variance, b.hygrometry_variance),
    };
    Comparison { a, b, deltas, verdicts }
}

/// Runs both scenarios in parallel and compares them. They must cover the same
/// duration under the same weather.
pub fn compare_scenarios(a: &Scenario, b: &Scenario) -> Result<(Comparison, RunOutput, RunOutput)> {
    if a.duration_s != b.duration_s {
        return Err(Error::config(format!(
            "scenarios differ in duration: {} s vs {} s",
            a.duration_s, b.duration_s
        )));
    }
    if a.weather_trace()? != b.weather_trace()? {
        return Err(Error::config("scenarios do not share the same weather"));
    }
    let (ra, rb) = thread::scope(|s| {
        let ha = s.spawn(|| run_scenario(a));
        let hb = s.spawn(|| run_scenario(b));
        (
            ha.join().expect("scenario thread panicked"),
            hb.join().expect("scenario thread panicked"),
        )
    });
    let (ra, rb) = (ra?, rb?);
    Ok((compare_metrics(&ra.metrics, &rb.metrics), ra, rb))
}
