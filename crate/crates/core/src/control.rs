//! Ultra-local model `ẏ = F + αu` and the intelligent P / PI control laws.
//!
//! Everything here is unit-agnostic: `k_p`, `k_i`, the reference derivative and
//! the F estimate are all expressed in the same controller time unit. Nothing in
//! this module knows about saturation, PWM or actuator faults.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// First-order ultra-local model. Only `ν = 1` is supported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct UltraLocalModel {
    alpha: f64,
}

impl UltraLocalModel {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha == 0.0 {
            return Err(Error::config(format!("alpha must be finite and non-zero, got {alpha}")));
        }
        Ok(Self { alpha })
    }

    /// Builds a model of the given derivative order; anything but 1 is rejected.
    pub fn with_order(alpha: f64, order: u32) -> Result<Self> {
        if order != 1 {
            return Err(Error::config(format!(
                "only first-order ultra-local models are supported, got order {order}"
            )));
        }
        Self::new(alpha)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn order(&self) -> u32 {
        1
    }
}

impl TryFrom<f64> for UltraLocalModel {
    type Error = Error;

    fn try_from(alpha: f64) -> Result<Self> {
        Self::new(alpha)
    }
}

impl From<UltraLocalModel> for f64 {
    fn from(m: UltraLocalModel) -> f64 {
        m.alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainSet {
    k_p: f64,
    k_i: f64,
}

impl GainSet {
    pub fn new(k_p: f64, k_i: f64) -> Result<Self> {
        if !(k_p.is_finite() && k_p > 0.0) {
            return Err(Error::config(format!("k_p must be positive, got {k_p}")));
        }
        if !(k_i.is_finite() && k_i >= 0.0) {
            return Err(Error::config(format!("k_i must be non-negative, got {k_i}")));
        }
        Ok(Self { k_p, k_i })
    }

    /// Gains for the intelligent proportional controller (`k_i = 0`).
    pub fn proportional(k_p: f64) -> Result<Self> {
        Self::new(k_p, 0.0)
    }

    pub fn k_p(&self) -> f64 {
        self.k_p
    }

    pub fn k_i(&self) -> f64 {
        self.k_i
    }

    pub fn is_proportional(&self) -> bool {
        self.k_i == 0.0
    }
}

/// Reference value and its analytic derivative at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReferencePoint {
    pub value: f64,
    pub derivative: f64,
}

impl ReferencePoint {
    pub fn constant(value: f64) -> Self {
        Self {
            value,
            derivative: 0.0,
        }
    }
}

/// A setpoint trajectory `y*(t)` with its derivative `ẏ*(t)`.
///
/// The derivative is supplied analytically, never differenced from samples.
pub trait ReferenceSignal {
    fn value_at(&self, t: f64) -> f64;
    fn derivative_at(&self, t: f64) -> f64;

    fn at(&self, t: f64) -> ReferencePoint {
        ReferencePoint {
            value: self.value_at(t),
            derivative: self.derivative_at(t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantReference(pub f64);

impl ReferenceSignal for ConstantReference {
    fn value_at(&self, _t: f64) -> f64 {
        self.0
    }

    fn derivative_at(&self, _t: f64) -> f64 {
        0.0
    }
}

/// Piecewise-constant reference: a list of `(start_time, value)` steps.
///
/// Before the first step the first value applies. The derivative is zero
/// everywhere, including at the step instants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstantReference {
    steps: Vec<(f64, f64)>,
}

impl PiecewiseConstantReference {
    pub fn new(steps: Vec<(f64, f64)>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::config("reference needs at least one step"));
        }
        if steps.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::config("reference steps must be finite"));
        }
        if steps.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::config("reference step times must be strictly increasing"));
        }
        Ok(Self { steps })
    }

    pub fn steps(&self) -> &[(f64, f64)] {
        &self.steps
    }
}

impl ReferenceSignal for PiecewiseConstantReference {
    fn value_at(&self, t: f64) -> f64 {
        let idx = self.steps.partition_point(|(start, _)| *start <= t);
        self.steps[idx.saturating_sub(1)].1
    }

    fn derivative_at(&self, _t: f64) -> f64 {
        0.0
    }
}

/// `e = y − y*`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct TrackingError(f64);

impl TrackingError {
    pub fn new(y: f64, y_star: f64) -> Self {
        Self(y - y_star)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Intelligent proportional controller: `u = −(F − ẏ* + K_P·e) / α`.
///
/// `gains.k_i()` is ignored. The output is not clamped.
pub fn ip_control(
    f_est: f64,
    y: f64,
    reference: ReferencePoint,
    gains: &GainSet,
    model: &UltraLocalModel,
) -> f64 {
    let e = TrackingError::new(y, reference.value).value();
    -(f_est - reference.derivative + gains.k_p() * e) / model.alpha()
}

/// Intelligent PI controller: `u = −(F − ẏ* + K_P·e + K_I·∫e) / α`.
///
/// `e_integral` is accumulated by the caller, see [`IntegralAccumulator`].
pub fn ipi_control(
    f_est: f64,
    y: f64,
    e_integral: f64,
    reference: ReferencePoint,
    gains: &GainSet,
    model: &UltraLocalModel,
) -> f64 {
    let e = TrackingError::new(y, reference.value).value();
    -(f_est - reference.derivative + gains.k_p() * e + gains.k_i() * e_integral) / model.alpha()
}

/// Closed-form solution of `ė + K_P·e = 0`.
pub fn predict_error(e0: f64, k_p: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("elapsed time must be non-negative, got {t}")));
    }
    if !(k_p > 0.0) {
        return Err(Error::InvalidInput(format!("k_p must be positive, got {k_p}")));
    }
    Ok(e0 * (-k_p * t).exp())
}

/// Left-rectangle accumulator of `∫e dt` with a symmetric anti-windup clamp at
/// `±10·span / K_I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralAccumulator {
    sum: f64,
    limit: f64,
}

impl IntegralAccumulator {
    pub fn new(k_i: f64, actuator_span: f64) -> Self {
        let limit = if k_i > 0.0 {
            10.0 * actuator_span.abs() / k_i
        } else {
            f64::INFINITY
        };
        Self { sum: 0.0, limit }
    }

    pub fn value(&self) -> f64 {
        self.sum
    }

    pub fn limit(&self) -> f64 {
        self.limit
    }

    pub fn accumulate(&mut self, e: f64, dt: f64) {
        self.sum = (self.sum + e * dt).clamp(-self.limit, self.limit);
    }

    pub fn reset(&mut self) {
        self.sum = 0.0;
    }
}

/// Stateful iP / iPI controller for one channel.
///
/// The integral is only used when `k_i > 0`; it is accumulated after each
/// command with the left rectangle rule over `dt` (controller time units).
#[derive(Debug, Clone)]
pub struct IntelligentController {
    model: UltraLocalModel,
    gains: GainSet,
    integral: IntegralAccumulator,
}

impl IntelligentController {
    pub fn new(model: UltraLocalModel, gains: GainSet, actuator_span: f64) -> Self {
        Self {
            model,
            gains,
            integral: IntegralAccumulator::new(gains.k_i(), actuator_span),
        }
    }

    pub fn model(&self) -> &UltraLocalModel {
        &self.model
    }

    pub fn gains(&self) -> &GainSet {
        &self.gains
    }

    pub fn command(&mut self, f_est: f64, y: f64, reference: ReferencePoint, dt: f64) -> f64 {
        if self.gains.is_proportional() {
            return ip_control(f_est, y, reference, &self.gains, &self.model);
        }
        let u = ipi_control(f_est, y, self.integral.value(), reference, &self.gains, &self.model);
        self.integral.accumulate(y - reference.value, dt);
        u
    }
}
