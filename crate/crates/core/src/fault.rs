//! Actuator efficiency loss `u_r = u·(1 − β)` injected between controller and plant.
//!
//! Nothing here is visible to the controller: accommodation happens only
//! through the F estimate, which then converges to `F̄ = F − αβu`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultSegment {
    pub start_s: f64,
    pub beta: f64,
}

/// Piecewise-constant `β(t)`; zero before the first segment.
///
/// `β = 0` segments are allowed and mark fault-free intervals. `β = 1` (no
/// actuation left) is rejected.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<FaultSegment>", into = "Vec<FaultSegment>")]
pub struct FaultProfile {
    segments: Vec<FaultSegment>,
}

impl FaultProfile {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(segments: Vec<FaultSegment>) -> Result<Self> {
        for s in &segments {
            if !(0.0..1.0).contains(&s.beta) {
                return Err(Error::config(format!("fault beta must be in [0, 1), got {}", s.beta)));
            }
            if !s.start_s.is_finite() {
                return Err(Error::config("fault segment start must be finite"));
            }
        }
        if segments.windows(2).any(|w| w[1].start_s <= w[0].start_s) {
            return Err(Error::config("fault segment start times must be strictly increasing"));
        }
        Ok(Self { segments })
    }

    /// A single step from healthy to `beta` at `start_s`.
    pub fn step(start_s: f64, beta: f64) -> Result<Self> {
        Self::new(vec![FaultSegment { start_s, beta }])
    }

    pub fn segments(&self) -> &[FaultSegment] {
        &self.segments
    }

    pub fn beta_at(&self, t: f64) -> f64 {
        let idx = self.segments.partition_point(|s| s.start_s <= t);
        idx.checked_sub(1).map_or(0.0, |i| self.segments[i].beta)
    }

    /// Start of the first segment with a non-zero loss, if any.
    pub fn first_fault_time(&self) -> Option<f64> {
        self.segments.iter().find(|s| s.beta > 0.0).map(|s| s.start_s)
    }
}

impl TryFrom<Vec<FaultSegment>> for FaultProfile {
    type Error = Error;

    fn try_from(segments: Vec<FaultSegment>) -> Result<Self> {
        Self::new(segments)
    }
}

impl From<FaultProfile> for Vec<FaultSegment> {
    fn from(p: FaultProfile) -> Self {
        p.segments
    }
}

pub fn apply_fault(u: f64, profile: &FaultProfile, t: f64) -> f64 {
    u * (1.0 - profile.beta_at(t))
}

/// `F̄ = F − α·β·u`.
pub fn effective_f(f: f64, alpha: f64, beta: f64, u: f64) -> f64 {
    f - alpha * beta * u
}
