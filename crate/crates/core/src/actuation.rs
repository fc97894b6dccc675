//! Continuous commands to Boolean actuators, and the Boolean baseline laws.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fraction of a PWM period the actuator is ON, always within `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct DutyCycle(f64);

impl DutyCycle {
    pub const OFF: DutyCycle = DutyCycle(0.0);
    pub const FULL: DutyCycle = DutyCycle(1.0);

    pub fn value(self) -> f64 {
        self.0
    }

    /// Scales the duty by `factor ∈ [0, 1]`, keeping it in range.
    pub fn derate(self, factor: f64) -> DutyCycle {
        DutyCycle((self.0 * factor).clamp(0.0, 1.0))
    }
}

/// Clamps a continuous command to `[0, 1]`. Negative demand on a one-sided
/// actuator saturates to 0.
pub fn to_duty(u: f64) -> Result<DutyCycle> {
    if u.is_nan() {
        return Err(Error::InvalidInput("NaN control command".into()));
    }
    Ok(DutyCycle(u.clamp(0.0, 1.0)))
}

/// ON-first PWM waveform: `round(duty · period / resolution)` ON slots, then OFF.
pub fn pwm_waveform(duty: DutyCycle, period: f64, resolution: f64) -> Result<Vec<bool>> {
    if !(resolution > 0.0 && period > 0.0) {
        return Err(Error::InvalidInput(format!(
            "PWM period ({period} s) and resolution ({resolution} s) must be positive"
        )));
    }
    if resolution > period {
        return Err(Error::InvalidInput(format!(
            "PWM resolution {resolution} s exceeds period {period} s"
        )));
    }
    let slots = period / resolution;
    let n = slots.round();
    if (slots - n).abs() > 1e-9 * n {
        return Err(Error::InvalidInput(format!(
            "PWM resolution {resolution} s does not divide period {period} s"
        )));
    }
    let n = n as usize;
    let on = on_slots(duty, n);
    Ok((0..n).map(|i| i < on).collect())
}

/// Number of ON slots out of `slots` for the given duty.
pub fn on_slots(duty: DutyCycle, slots: usize) -> usize {
    ((duty.value() * slots as f64).round() as usize).min(slots)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HysteresisConfig {
    pub reference: f64,
    pub tolerance: f64,
}

impl HysteresisConfig {
    pub fn new(reference: f64, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0) || !reference.is_finite() {
            return Err(Error::config(format!(
                "hysteresis needs a finite reference and positive tolerance, got {reference} ± {tolerance}"
            )));
        }
        Ok(Self { reference, tolerance })
    }
}

/// Thermostat with a dead band: ON below `ref − tol`, OFF above `ref + tol`,
/// previous state held in between.
pub fn boolean_heat(ti: f64, cfg: &HysteresisConfig, prev_on: bool) -> bool {
    if ti < cfg.reference - cfg.tolerance {
        true
    } else if ti > cfg.reference + cfg.tolerance {
        false
    } else {
        prev_on
    }
}

/// Periodic fog schedule, inhibited above the dehumidification reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FogSchedule {
    pub on_duration: f64,
    pub off_duration: f64,
    pub dehumid_ref: f64,
}

impl Default for FogSchedule {
    /// 3 minutes on, 27 minutes off, cut off at 60 %.
    fn default() -> Self {
        Self {
            on_duration: 180.0,
            off_duration: 1620.0,
            dehumid_ref: 60.0,
        }
    }
}

impl FogSchedule {
    pub fn new(on_duration: f64, off_duration: f64, dehumid_ref: f64) -> Result<Self> {
        if !(on_duration >= 0.0 && off_duration >= 0.0 && on_duration + off_duration > 0.0) {
            return Err(Error::config("fog schedule durations must be non-negative with a positive period"));
        }
        Ok(Self {
            on_duration,
            off_duration,
            dehumid_ref,
        })
    }

    pub fn period(&self) -> f64 {
        self.on_duration + self.off_duration
    }
}

/// ON iff inside the ON phase of the cycle and `hi` is below the cutoff.
/// The cutoff is re-evaluated on every call, it does not latch.
pub fn boolean_fog(t: f64, hi: f64, sched: &FogSchedule) -> bool {
    let phase = t.rem_euclid(sched.period());
    phase < sched.on_duration && hi < sched.dehumid_ref
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn duty_clamps() {
        assert_eq!(to_duty(0.37).unwrap().value(), 0.37);
        assert_eq!(to_duty(-3.0).unwrap().value(), 0.0);
        assert_eq!(to_duty(2.4).unwrap().value(), 1.0);
        assert_eq!(to_duty(f64::INFINITY).unwrap().value(), 1.0);
        assert!(to_duty(f64::NAN).is_err());
    }

    #[test]
    fn pwm_edges() {
        assert!(pwm_waveform(DutyCycle::OFF, 60.0, 1.0).unwrap().iter().all(|b| !b));
        assert!(pwm_waveform(DutyCycle::FULL, 60.0, 1.0).unwrap().iter().all(|b| *b));
        let half = pwm_waveform(to_duty(0.5).unwrap(), 60.0, 1.0).unwrap();
        assert_eq!(half.len(), 60);
        assert!(half[..30].iter().all(|b| *b));
        assert!(half[30..].iter().all(|b| !b));
        assert!(pwm_waveform(DutyCycle::FULL, 60.0, 120.0).is_err());
        assert!(pwm_waveform(DutyCycle::FULL, 60.0, 7.0).is_err());
    }

    #[test]
    fn heat_band() {
        let cfg = HysteresisConfig::new(18.0, 0.5).unwrap();
        assert!(boolean_heat(17.4, &cfg, false));
        assert!(!boolean_heat(18.6, &cfg, true));
        assert!(boolean_heat(18.2, &cfg, true));
        assert!(!boolean_heat(18.2, &cfg, false));
        assert!(HysteresisConfig::new(18.0, 0.0).is_err());
    }

    #[test]
    fn fog_schedule() {
        let s = FogSchedule::default();
        assert_eq!(s.period(), 1800.0);
        assert!(boolean_fog(60.0, 55.0, &s));
        assert!(!boolean_fog(600.0, 55.0, &s));
        assert!(!boolean_fog(60.0, 65.0, &s));
        assert!(boolean_fog(1800.0 * 7.0 + 10.0, 55.0, &s));
    }

    #[test]
    fn fog_on_time_per_period() {
        let s = FogSchedule::default();
        for k in 0..4 {
            let on = (0..1800).filter(|i| boolean_fog((k * 1800 + i) as f64, 10.0, &s)).count();
            assert_eq!(on, 180);
        }
    }

    proptest! {
        #[test]
        fn waveform_mean_matches_duty(d in 0.0f64..=1.0, slots in 1usize..600) {
            let w = pwm_waveform(to_duty(d).unwrap(), slots as f64, 1.0).unwrap();
            let mean = w.iter().filter(|b| **b).count() as f64 / slots as f64;
            prop_assert!((mean - d).abs() <= 1.0 / slots as f64);
        }

        // Output changes only on a band-edge crossing.
        #[test]
        fn heat_does_not_chatter(trace in prop::collection::vec(16.5f64..19.5, 1..300)) {
            let cfg = HysteresisConfig::new(18.0, 0.5).unwrap();
            let mut on = false;
            for ti in trace {
                let next = boolean_heat(ti, &cfg, on);
                if next != on {
                    let crossed = if next { ti < 17.5 } else { ti > 18.5 };
                    prop_assert!(crossed);
                }
                on = next;
            }
        }
    }
}
