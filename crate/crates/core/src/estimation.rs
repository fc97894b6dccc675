//! Sliding-window estimators of the ultra-local term `F`.
//!
//! Both estimators integrate over a uniform window of `N` samples spanning
//! `τ = (N − 1)·Ts`, using a window-local integration variable `σ ∈ [0, τ]`.
//! Timestamps are seconds; the estimators convert them to controller time units
//! via [`EstimatorConfig::time_unit`] so that `F` comes out in
//! `y`-units per controller time unit.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One control-period record.
///
/// `u` is the command acting on the plant over the sampling interval that ends
/// at `t` (for continuously varying inputs, simply `u(t)`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WindowEntry {
    pub t: f64,
    pub y: f64,
    pub u: f64,
    pub e: f64,
    pub y_star_dot: f64,
}

/// Fixed-capacity chronological buffer with uniform spacing `Ts`.
#[derive(Debug, Clone)]
pub struct SlidingWindow {
    capacity: usize,
    sample_period: f64,
    entries: VecDeque<WindowEntry>,
}

impl SlidingWindow {
    pub fn new(capacity: usize, sample_period: f64) -> Result<Self> {
        if capacity < 2 {
            return Err(Error::config(format!("window capacity must be at least 2, got {capacity}")));
        }
        if !(sample_period.is_finite() && sample_period > 0.0) {
            return Err(Error::config(format!("sample period must be positive, got {sample_period}")));
        }
        Ok(Self {
            capacity,
            sample_period,
            entries: VecDeque::with_capacity(capacity),
        })
    }

    /// Window covering `tau` seconds at `sample_period`, i.e. `tau / Ts + 1` samples.
    pub fn for_span(tau: f64, sample_period: f64) -> Result<Self> {
        let intervals = tau / sample_period;
        let rounded = intervals.round();
        if !(rounded >= 1.0) || (intervals - rounded).abs() > 1e-9 * rounded.max(1.0) {
            return Err(Error::config(format!(
                "window length {tau} s is not a positive multiple of the sample period {sample_period} s"
            )));
        }
        Self::new(rounded as usize + 1, sample_period)
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn sample_period(&self) -> f64 {
        self.sample_period
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() == self.capacity
    }

    /// Time covered by a full window, `(N − 1)·Ts` seconds.
    pub fn span(&self) -> f64 {
        (self.capacity - 1) as f64 * self.sample_period
    }

    pub fn entries(&self) -> impl ExactSizeIterator<Item = &WindowEntry> + '_ {
        self.entries.iter()
    }

    pub fn last(&self) -> Option<&WindowEntry> {
        self.entries.back()
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    /// Appends a sample, evicting the oldest one when full.
    ///
    /// The new timestamp must be exactly one sample period after the last one.
    pub fn push(&mut self, entry: WindowEntry) -> Result<()> {
        if let Some(last) = self.entries.back() {
            let expected = last.t + self.sample_period;
            let tol = 1e-9 * expected.abs().max(self.sample_period);
            if !((entry.t - expected).abs() <= tol) {
                return Err(Error::NonMonotonicSample {
                    got: entry.t,
                    expected,
                });
            }
        }
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(entry);
        Ok(())
    }

    fn require_full(&self) -> Result<()> {
        if self.is_full() {
            Ok(())
        } else {
            Err(Error::InsufficientData {
                have: self.entries.len(),
                need: self.capacity,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Window length in seconds.
    pub tau: f64,
    pub alpha: f64,
    /// Only used by the closed-loop estimator.
    pub k_p: f64,
    /// Seconds per controller time unit (1 for SI rates, 60 for per-minute rates).
    pub time_unit: f64,
}

impl EstimatorConfig {
    pub fn new(tau: f64, alpha: f64, k_p: f64) -> Result<Self> {
        Self::with_time_unit(tau, alpha, k_p, 1.0)
    }

    pub fn with_time_unit(tau: f64, alpha: f64, k_p: f64, time_unit: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::config(format!("tau must be positive, got {tau}")));
        }
        if !(time_unit.is_finite() && time_unit > 0.0) {
            return Err(Error::config(format!("time unit must be positive, got {time_unit}")));
        }
        if !alpha.is_finite() || alpha == 0.0 {
            return Err(Error::config(format!("alpha must be finite and non-zero, got {alpha}")));
        }
        if !k_p.is_finite() {
            return Err(Error::config("k_p must be finite"));
        }
        Ok(Self {
            tau,
            alpha,
            k_p,
            time_unit,
        })
    }

    fn check_window(&self, window: &SlidingWindow) -> Result<()> {
        window.require_full()?;
        let span = window.span();
        if (span - self.tau).abs() > 1e-9 * span.max(self.tau) {
            return Err(Error::config(format!(
                "estimator tau {} s does not match window span {} s",
                self.tau, span
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum EstimatorKind {
    #[default]
    ClosedLoop,
    Algebraic,
}

impl EstimatorKind {
    pub fn estimate(self, window: &SlidingWindow, cfg: &EstimatorConfig) -> Result<f64> {
        match self {
            EstimatorKind::ClosedLoop => closed_loop_estimate(window, cfg),
            EstimatorKind::Algebraic => algebraic_estimate(window, cfg),
        }
    }

    /// Estimate, or 0 while the window is still filling.
    pub fn estimate_or_zero(self, window: &SlidingWindow, cfg: &EstimatorConfig) -> Result<f64> {
        match self.estimate(window, cfg) {
            Err(Error::InsufficientData { .. }) => Ok(0.0),
            other => other,
        }
    }
}

/// Composite Simpson quadrature over uniformly spaced samples.
///
/// An odd number of intervals closes with Simpson's 3/8 rule on the last three;
/// a single interval falls back to the trapezoid rule.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len().saturating_sub(1);
    match n {
        0 => 0.0,
        1 => 0.5 * h * (values[0] + values[1]),
        _ if n % 2 == 0 => simpson_even(values, h),
        3 => three_eighths(values, h),
        _ => simpson_even(&values[..n - 2], h) + three_eighths(&values[n - 3..], h),
    }
}

fn simpson_even(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    let inner: f64 = values[1..n]
        .iter()
        .enumerate()
        .map(|(i, v)| if i % 2 == 0 { 4.0 * v } else { 2.0 * v })
        .sum();
    h / 3.0 * (values[0] + inner + values[n])
}

fn three_eighths(v: &[f64], h: f64) -> f64 {
    3.0 * h / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3])
}

fn window_integral(
    window: &SlidingWindow,
    cfg: &EstimatorConfig,
    integrand: impl Fn(f64, &WindowEntry) -> f64,
) -> f64 {
    let h = window.sample_period() / cfg.time_unit;
    let values: Vec<f64> = window
        .entries()
        .enumerate()
        .map(|(j, entry)| integrand(j as f64 * h, entry))
        .collect();
    simpson(&values, h)
}

/// Algebraic estimator:
/// `F = −(6/τ³) ∫₀^τ [(τ − 2σ)·y(t−τ+σ) + α·σ(τ − σ)·u(t−τ+σ)] dσ`.
///
/// Exact for constant `F` whatever `u` is (up to quadrature error). It behaves
/// as a parabolic-weighted average of `ẏ − αu`, so it lags by about `τ/2`.
pub fn algebraic_estimate(window: &SlidingWindow, cfg: &EstimatorConfig) -> Result<f64> {
    cfg.check_window(window)?;
    let tau = cfg.tau / cfg.time_unit;
    let integral = window_integral(window, cfg, |s, entry| {
        (tau - 2.0 * s) * entry.y + cfg.alpha * s * (tau - s) * entry.u
    });
    Ok(-6.0 / tau.powi(3) * integral)
}

/// `(1/τ) ∫ (ẏ* − αu − K_P·e) dσ` over the window, the estimate obtained by
/// assuming the loop follows `ė = −K_P·e` exactly.
///
/// When `u` is produced by the iP law from the estimate this returns, the
/// integrand collapses to the estimate itself, so on its own it never learns
/// anything about the plant. [`closed_loop_estimate`] adds the measured
/// departure from the prescribed error dynamics.
pub fn closed_loop_integral(window: &SlidingWindow, cfg: &EstimatorConfig) -> Result<f64> {
    cfg.check_window(window)?;
    let tau = cfg.tau / cfg.time_unit;
    let integral = window_integral(window, cfg, |_, entry| {
        entry.y_star_dot - cfg.alpha * entry.u - cfg.k_p * entry.e
    });
    Ok(integral / tau)
}

/// `(1/τ) ∫ (ė + K_P·e) dσ`: how far the window departs from `ė = −K_P·e`.
///
/// `∫ė` is taken exactly as `e(t) − e(t−τ)`.
pub fn error_dynamics_residual(window: &SlidingWindow, cfg: &EstimatorConfig) -> Result<f64> {
    cfg.check_window(window)?;
    let tau = cfg.tau / cfg.time_unit;
    let (first, last) = match (window.entries.front(), window.entries.back()) {
        (Some(f), Some(l)) => (f.e, l.e),
        _ => unreachable!("full window is non-empty"),
    };
    let e_integral = window_integral(window, cfg, |_, entry| entry.e);
    Ok((last - first + cfg.k_p * e_integral) / tau)
}

/// Closed-loop estimate: [`closed_loop_integral`] corrected by
/// [`error_dynamics_residual`].
///
/// While the loop obeys `ė = −K_P·e` the correction vanishes. Otherwise it
/// supplies the part of `ẏ − αu` the prescribed dynamics do not explain, which
/// is where plant mismatch, disturbances and actuator faults show up.
pub fn closed_loop_estimate(window: &SlidingWindow, cfg: &EstimatorConfig) -> Result<f64> {
    Ok(closed_loop_integral(window, cfg)? + error_dynamics_residual(window, cfg)?)
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;

    fn filled(n: usize, ts: f64, t0: f64, f: impl Fn(f64) -> WindowEntry) -> SlidingWindow {
        let mut w = SlidingWindow::new(n, ts).unwrap();
        for j in 0..n {
            let t = t0 + j as f64 * ts;
            w.push(WindowEntry { t, ..f(t) }).unwrap();
        }
        w
    }

    #[test]
    fn push_semantics() {
        let mut w = SlidingWindow::new(3, 60.0).unwrap();
        w.push(WindowEntry { t: 0.0, ..Default::default() }).unwrap();
        assert_eq!(w.len(), 1);
        for k in 1..4 {
            w.push(WindowEntry { t: 60.0 * k as f64, y: k as f64, ..Default::default() }).unwrap();
        }
        assert_eq!(w.len(), 3);
        assert_eq!(w.entries().next().unwrap().t, 60.0);
        let err = w.push(WindowEntry { t: 120.0, ..Default::default() }).unwrap_err();
        assert!(matches!(err, Error::NonMonotonicSample { .. }));
        assert!(err.to_string().contains("non-monotonic sample"));
        assert!(w.push(WindowEntry { t: 300.0, ..Default::default() }).is_err());
        assert!(SlidingWindow::new(1, 1.0).is_err());
        assert!(SlidingWindow::new(4, 0.0).is_err());
    }

    #[test]
    fn for_span_checks_multiple() {
        let w = SlidingWindow::for_span(360.0, 60.0).unwrap();
        assert_eq!(w.capacity(), 7);
        assert_eq!(w.span(), 360.0);
        assert!(SlidingWindow::for_span(330.0, 60.0).is_err());
    }

    #[test]
    fn partial_window_is_insufficient() {
        let mut w = SlidingWindow::new(7, 1.0).unwrap();
        w.push(WindowEntry::default()).unwrap();
        let cfg = EstimatorConfig::new(6.0, 1.0, 2.0).unwrap();
        assert!(matches!(algebraic_estimate(&w, &cfg), Err(Error::InsufficientData { have: 1, need: 7 })));
        assert!(matches!(closed_loop_estimate(&w, &cfg), Err(Error::InsufficientData { .. })));
        assert_eq!(EstimatorKind::ClosedLoop.estimate_or_zero(&w, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn tau_must_match_span() {
        let w = filled(7, 1.0, 0.0, |_| WindowEntry::default());
        let cfg = EstimatorConfig::new(5.0, 1.0, 2.0).unwrap();
        assert!(matches!(algebraic_estimate(&w, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn simpson_rules_exact_on_cubics() {
        let cubic = |x: f64| 2.0 * x.powi(3) - x * x + 3.0 * x - 1.0;
        let exact = |a: f64, b: f64| {
            let p = |x: f64| 0.5 * x.powi(4) - x.powi(3) / 3.0 + 1.5 * x * x - x;
            p(b) - p(a)
        };
        for n in 2..10 {
            let h = 0.3;
            let v: Vec<f64> = (0..=n).map(|j| cubic(j as f64 * h)).collect();
            assert_relative_eq!(simpson(&v, h), exact(0.0, n as f64 * h), epsilon = 1e-10);
        }
        assert_relative_eq!(simpson(&[1.0, 3.0], 2.0), 4.0);
    }

    #[test]
    fn zero_inputs_give_zero() {
        let w = filled(7, 60.0, 0.0, |_| WindowEntry::default());
        let cfg = EstimatorConfig::with_time_unit(360.0, 1.0, 2.0, 60.0).unwrap();
        assert_eq!(algebraic_estimate(&w, &cfg).unwrap(), 0.0);
        assert_eq!(closed_loop_estimate(&w, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn algebraic_recovers_slope() {
        for tau in [0.1, 1.0, 6.0, 360.0] {
            let w = filled(7, tau / 6.0, 3.0, |t| WindowEntry { y: 2.0 * t, ..Default::default() });
            let cfg = EstimatorConfig::new(tau, 1.0, 2.0).unwrap();
            assert_relative_eq!(algebraic_estimate(&w, &cfg).unwrap(), 2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn closed_loop_constant_window() {
        let w = filled(7, 60.0, 0.0, |_| WindowEntry { u: 1.0, ..Default::default() });
        let cfg = EstimatorConfig::with_time_unit(360.0, 1.0, 2.0, 60.0).unwrap();
        assert_relative_eq!(closed_loop_integral(&w, &cfg).unwrap(), -1.0, epsilon = 1e-12);
        assert_relative_eq!(closed_loop_estimate(&w, &cfg).unwrap(), -1.0, epsilon = 1e-12);
    }

    // Independent oracle: 10⁴-panel midpoint quadrature of the algebraic formula
    // evaluated on the analytic signal.
    fn algebraic_oracle(y: impl Fn(f64) -> f64, t_end: f64, tau: f64) -> f64 {
        let m = 10_000;
        let h = tau / m as f64;
        let mut acc = 0.0;
        for i in 0..m {
            let s = (i as f64 + 0.5) * h;
            acc += (tau - 2.0 * s) * y(t_end - tau + s) * h;
        }
        -6.0 / tau.powi(3) * acc
    }

    #[test]
    fn algebraic_tracks_sine_derivative() {
        let tau = 0.1;
        let n = 11;
        // window centred on t = 1
        let t_end = 1.0 + tau / 2.0;
        let w = filled(n, tau / (n - 1) as f64, t_end - tau, |t| WindowEntry { y: t.sin(), ..Default::default() });
        let cfg = EstimatorConfig::new(tau, 1.0, 0.0).unwrap();
        let est = algebraic_estimate(&w, &cfg).unwrap();
        let oracle = algebraic_oracle(f64::sin, t_end, tau);
        assert!((est - oracle).abs() < 1e-6, "est {est} oracle {oracle}");
        assert!((est - 1f64.cos()).abs() < 5e-3, "est {est}");

        // a trailing window ending at 1 sees the derivative half a window earlier
        let w = filled(n, tau / (n - 1) as f64, 1.0 - tau, |t| WindowEntry { y: t.sin(), ..Default::default() });
        let est = algebraic_estimate(&w, &cfg).unwrap();
        assert!((est - algebraic_oracle(f64::sin, 1.0, tau)).abs() < 1e-6);
        assert!((est - 0.95f64.cos()).abs() < 5e-3);
    }

    proptest! {
        #[test]
        fn algebraic_exact_for_affine_y_constant_u(
            f in -10.0f64..10.0, u in -5.0f64..5.0, alpha in 0.1f64..5.0, y0 in -50.0f64..50.0,
            t0 in 0.0f64..1e5, ts in 0.01f64..120.0, half in 1usize..8,
        ) {
            let n = 2 * half + 1;
            // ẏ = F + αu
            let slope = f + alpha * u;
            let w = filled(n, ts, t0, |t| WindowEntry { y: y0 + slope * (t - t0), u, ..Default::default() });
            let cfg = EstimatorConfig::new(ts * (n - 1) as f64, alpha, 2.0).unwrap();
            let est = algebraic_estimate(&w, &cfg).unwrap();
            prop_assert!((est - f).abs() < 1e-9 * (1.0 + slope.abs() + y0.abs() / (ts * n as f64)), "{} vs {}", est, f);
        }

        #[test]
        fn estimators_are_time_shift_invariant(
            ys in prop::collection::vec(-20.0f64..20.0, 7),
            us in prop::collection::vec(-1.0f64..1.0, 7),
            shift in -1e4f64..1e4,
        ) {
            let make = |t0: f64| {
                let mut w = SlidingWindow::new(7, 60.0).unwrap();
                for j in 0..7 {
                    w.push(WindowEntry { t: t0 + 60.0 * j as f64, y: ys[j], u: us[j], e: ys[j] - 18.0, y_star_dot: 0.0 }).unwrap();
                }
                w
            };
            let cfg = EstimatorConfig::with_time_unit(360.0, 1.0, 2.0, 60.0).unwrap();
            let (a, b) = (make(0.0), make(shift.round()));
            prop_assert_eq!(algebraic_estimate(&a, &cfg).unwrap(), algebraic_estimate(&b, &cfg).unwrap());
            prop_assert_eq!(closed_loop_estimate(&a, &cfg).unwrap(), closed_loop_estimate(&b, &cfg).unwrap());
        }

        #[test]
        fn window_never_exceeds_capacity(cap in 2usize..12, pushes in 0usize..40) {
            let mut w = SlidingWindow::new(cap, 1.5).unwrap();
            for k in 0..pushes {
                w.push(WindowEntry { t: 1.5 * k as f64, ..Default::default() }).unwrap();
                prop_assert!(w.len() <= cap);
                let ts: Vec<f64> = w.entries().map(|e| e.t).collect();
                prop_assert!(ts.windows(2).all(|p| p[1] > p[0]));
            }
            prop_assert_eq!(w.len(), pushes.min(cap));
        }
    }
}
