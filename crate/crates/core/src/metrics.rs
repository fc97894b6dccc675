use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean and population variance of `y − y*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingStats {
    pub mean_error: f64,
    pub variance: f64,
    pub std_dev: f64,
    pub n: usize,
}

pub fn tracking_stats(series: impl IntoIterator<Item = (f64, f64)>) -> Result<TrackingStats> {
    let errors: Vec<f64> = series.into_iter().map(|(y, y_star)| y - y_star).collect();
    if errors.is_empty() {
        return Err(Error::InvalidInput("tracking statistics need at least one sample".into()));
    }
    let n = errors.len();
    let mean = errors.iter().sum::<f64>() / n as f64;
    let variance = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n as f64;
    Ok(TrackingStats {
        mean_error: mean,
        variance,
        std_dev: variance.sqrt(),
        n,
    })
}

/// ON time in minutes.
pub fn actuator_on_time(waveform: &[bool], resolution: f64) -> f64 {
    waveform.iter().filter(|on| **on).count() as f64 * resolution / 60.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HygrometryLevel {
    /// Below 20 %.
    Severe,
    /// Below 40 %, too dry for seedlings.
    Seedling,
    /// Above 95 %, close to saturation.
    Saturation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HygrometryViolation {
    pub index: usize,
    pub hi: f64,
    pub level: HygrometryLevel,
}

/// Flags each sample at most once, with its most serious level.
pub fn hygrometry_guard(hi_series: &[f64]) -> Vec<HygrometryViolation> {
    hi_series
        .iter()
        .enumerate()
        .filter_map(|(index, &hi)| {
            let level = if hi < 20.0 {
                HygrometryLevel::Severe
            } else if hi < 40.0 {
                HygrometryLevel::Seedling
            } else if hi > 95.0 {
                HygrometryLevel::Saturation
            } else {
                return None;
            };
            Some(HygrometryViolation { index, hi, level })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ViolationCounts {
    pub severe: usize,
    pub seedling: usize,
    pub saturation: usize,
}

impl ViolationCounts {
    pub fn from_violations(v: &[HygrometryViolation]) -> Self {
        let count = |level| v.iter().filter(|x| x.level == level).count();
        Self {
            severe: count(HygrometryLevel::Severe),
            seedling: count(HygrometryLevel::Seedling),
            saturation: count(HygrometryLevel::Saturation),
        }
    }
}
