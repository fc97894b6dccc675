use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::scenario::{ControllerKind, FaultTarget, Scenario};
use crate::actuation::{boolean_fog, boolean_heat, on_slots, to_duty, DutyCycle, HysteresisConfig};
use crate::control::{IntelligentController, ReferencePoint, ReferenceSignal};
use crate::error::{Error, Result};
use crate::estimation::{EstimatorKind, WindowEntry};
use crate::greenhouse::{read_sensors, step_plant, ActuatorInputs};
use crate::metrics::{
    actuator_on_time, hygrometry_guard, tracking_stats, TrackingStats, ViolationCounts,
};

/// One row of the time-series output, taken at the start of a control period.
///
/// `ti_c`/`hi_pct` are the sensor readings the controller acted on. `u_*` is
/// the raw command, `duty_*` the clamped duty before any fault derating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub t_s: f64,
    pub ti_c: f64,
    pub hi_pct: f64,
    pub ti_ref_c: f64,
    pub hi_ref_pct: f64,
    pub te_c: f64,
    pub he_pct: f64,
    pub rg_wm2: f64,
    pub vv_kmh: f64,
    pub u_heat: f64,
    pub duty_heat: f64,
    pub u_fog: f64,
    pub duty_fog: f64,
    pub f_est_temp: f64,
    pub f_est_hygro: f64,
    pub beta: f64,
}

/// Plant-side ground truth over the period `[t_s, t_s + Ts)`.
///
/// Rates are per controller time unit. `f_*` is `ẏ − α·u_r` with `u_r` the
/// fraction of the period the actuator was really ON; `f_bar_*` is
/// `ẏ − α·duty`, the term a fault-blind estimator should converge to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodTruth {
    pub t_s: f64,
    pub ti: f64,
    pub hi: f64,
    pub ydot_temp: f64,
    pub ydot_hygro: f64,
    pub heat_on_fraction: f64,
    pub fog_on_fraction: f64,
    pub f_temp: f64,
    pub f_bar_temp: f64,
    pub f_hygro: f64,
    pub f_bar_hygro: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub name: String,
    pub controller: ControllerKind,
    pub estimator: EstimatorKind,
    pub duration_s: f64,
    pub metrics_from_s: f64,
    pub temperature: TrackingStats,
    pub hygrometry: TrackingStats,
    /// Tracking of the faulted channel from the first fault onwards.
    pub post_fault: Option<TrackingStats>,
    pub temperature_in_band_fraction: f64,
    pub heating_on_time_min: f64,
    pub fog_on_time_min: f64,
    pub heating_duty_fraction: f64,
    pub hygrometry_violations: ViolationCounts,
    pub scenario: Scenario,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<RunRecord>,
    pub truth: Vec<PeriodTruth>,
    pub heat_waveform: Vec<bool>,
    pub fog_waveform: Vec<bool>,
    pub metrics: RunMetrics,
}

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const PWM_FILE: &str = "pwm.csv";
pub const METRICS_FILE: &str = "metrics.json";

impl RunOutput {
    /// Writes `timeseries.csv`, `pwm.csv` and `metrics.json` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

        let path = dir.join(TIMESERIES_FILE);
        let mut w = csv::Writer::from_path(&path)?;
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;

        let path = dir.join(PWM_FILE);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["t_s", "heat", "fog"])?;
        let res = self.metrics.scenario.settings.pwm_resolution_s;
        for (i, (h, f)) in self.heat_waveform.iter().zip(&self.fog_waveform).enumerate() {
            let t = (i as f64 * res).to_string();
            w.write_record([t.as_str(), if *h { "1" } else { "0" }, if *f { "1" } else { "0" }])?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;

        let path = dir.join(METRICS_FILE);
        let json = serde_json::to_string_pretty(&self.metrics).map_err(|source| Error::Json {
            path: path.clone(),
            source,
        })?;
        fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))
    }
}

/// Keeps the first `keep` ON slots of `wave` and switches the rest off.
fn truncate_on(wave: &mut [bool], keep: usize) {
    let mut seen = 0;
    for slot in wave.iter_mut().filter(|s| **s) {
        seen += 1;
        if seen > keep {
            *slot = false;
        }
    }
}

/// Simulates one scenario at one-minute control resolution.
///
/// Each period: read sensors, push the window samples, estimate F, compute the
/// commands, derate the faulted actuator, then integrate the plant one PWM slot
/// at a time with weather interpolated at each slot.
pub fn run_scenario(scenario: &Scenario) -> Result<RunOutput> {
    scenario.validate()?;
    let s = &scenario.settings;
    let model = s.model()?;
    let gains = s.gains()?;
    let est_cfg = s.estimator_config()?;
    let mut win_t = s.new_window()?;
    let mut win_h = s.new_window()?;
    let slots = s.slots_per_period()?;
    let res = s.pwm_resolution_s;
    let ts = s.sample_period_s;
    let alpha = s.alpha;
    let reference = scenario.temperature_reference.build()?;
    let weather = scenario.weather_trace()?;
    let hi_ref = scenario.hygrometry_reference_pct;

    let mut ctrl_t = IntelligentController::new(model, gains, 1.0);
    let mut ctrl_h = IntelligentController::new(model, gains, 1.0);
    let dt_units = ts / s.time_unit_s;

    let periods = scenario.periods();
    let mut state = scenario.initial_state;
    let mut records = Vec::with_capacity(periods);
    let mut truth = Vec::with_capacity(periods);
    let mut heat_waveform = Vec::with_capacity(periods * slots);
    let mut fog_waveform = Vec::with_capacity(periods * slots);
    let (mut prev_duty_t, mut prev_duty_h) = (0.0, 0.0);
    let mut heat_latched = false;

    for k in 0..periods {
        let t = k as f64 * ts;
        let (ti_m, hi_m) = read_sensors(&state, &scenario.sensors, scenario.seed, k as u64);
        let ref_t = reference.at(t);
        let ref_h = ReferencePoint::constant(hi_ref);

        win_t.push(WindowEntry {
            t,
            y: ti_m,
            u: prev_duty_t,
            e: ti_m - ref_t.value,
            y_star_dot: ref_t.derivative,
        })?;
        win_h.push(WindowEntry {
            t,
            y: hi_m,
            u: prev_duty_h,
            e: hi_m - ref_h.value,
            y_star_dot: 0.0,
        })?;
        let f_t = scenario.estimator.estimate_or_zero(&win_t, &est_cfg)?;
        let f_h = scenario.estimator.estimate_or_zero(&win_h, &est_cfg)?;

        let mut heat_wave = vec![false; slots];
        let mut fog_wave = vec![false; slots];
        let (u_t, duty_t, u_h, duty_h);
        match scenario.controller {
            ControllerKind::Ip | ControllerKind::Ipi => {
                u_t = ctrl_t.command(f_t, ti_m, ref_t, dt_units);
                u_h = ctrl_h.command(f_h, hi_m, ref_h, dt_units);
                duty_t = to_duty(u_t)?.value();
                duty_h = to_duty(u_h)?.value();
                let on_t = on_slots(to_duty(duty_t)?, slots);
                let on_h = on_slots(to_duty(duty_h)?, slots);
                heat_wave.iter_mut().take(on_t).for_each(|x| *x = true);
                fog_wave.iter_mut().take(on_h).for_each(|x| *x = true);
            }
            ControllerKind::Boolean => {
                let hyst = HysteresisConfig::new(ref_t.value, scenario.tolerance_c)?;
                heat_latched = boolean_heat(ti_m, &hyst, heat_latched);
                heat_wave.iter_mut().for_each(|x| *x = heat_latched);
                for (j, slot) in fog_wave.iter_mut().enumerate() {
                    *slot = boolean_fog(t + j as f64 * res, hi_m, &scenario.fog_schedule);
                }
                duty_t = if heat_latched { 1.0 } else { 0.0 };
                duty_h = fog_wave.iter().filter(|x| **x).count() as f64 / slots as f64;
                u_t = duty_t;
                u_h = duty_h;
            }
        }

        let beta = scenario.fault.beta_at(t);
        if beta > 0.0 {
            let wave = match scenario.fault_target {
                FaultTarget::Heating => &mut heat_wave,
                FaultTarget::Fog => &mut fog_wave,
            };
            let on = wave.iter().filter(|x| **x).count();
            truncate_on(wave, on_slots(DutyCycle::FULL.derate(1.0 - beta), on));
        }

        let start = state;
        for j in 0..slots {
            let inputs = ActuatorInputs {
                ch: if heat_wave[j] { 1.0 } else { 0.0 },
                br: if fog_wave[j] { 1.0 } else { 0.0 },
                ov: scenario.opening,
                om: scenario.shade,
            };
            let w = weather.at(t + j as f64 * res);
            state = step_plant(state, &inputs, &w, &scenario.plant, res)?;
        }

        let frac = |wave: &[bool]| wave.iter().filter(|x| **x).count() as f64 / slots as f64;
        let (heat_frac, fog_frac) = (frac(&heat_wave), frac(&fog_wave));
        let ydot_t = (state.ti - start.ti) / dt_units;
        let ydot_h = (state.hi - start.hi) / dt_units;
        truth.push(PeriodTruth {
            t_s: t,
            ti: start.ti,
            hi: start.hi,
            ydot_temp: ydot_t,
            ydot_hygro: ydot_h,
            heat_on_fraction: heat_frac,
            fog_on_fraction: fog_frac,
            f_temp: ydot_t - alpha * heat_frac,
            f_bar_temp: ydot_t - alpha * duty_t,
            f_hygro: ydot_h - alpha * fog_frac,
            f_bar_hygro: ydot_h - alpha * duty_h,
        });

        let w = weather.at(t);
        records.push(RunRecord {
            t_s: t,
            ti_c: ti_m,
            hi_pct: hi_m,
            ti_ref_c: ref_t.value,
            hi_ref_pct: hi_ref,
            te_c: w.te,
            he_pct: w.he,
            rg_wm2: w.rg,
            vv_kmh: w.vv,
            u_heat: u_t,
            duty_heat: duty_t,
            u_fog: u_h,
            duty_fog: duty_h,
            f_est_temp: f_t,
            f_est_hygro: f_h,
            beta,
        });
        heat_waveform.extend_from_slice(&heat_wave);
        fog_waveform.extend_from_slice(&fog_wave);
        prev_duty_t = duty_t;
        prev_duty_h = duty_h;
    }

    let metrics = compute_metrics(scenario, &records, &heat_waveform, &fog_waveform)?;
    Ok(RunOutput {
        records,
        truth,
        heat_waveform,
        fog_waveform,
        metrics,
    })
}

fn compute_metrics(
    scenario: &Scenario,
    records: &[RunRecord],
    heat: &[bool],
    fog: &[bool],
) -> Result<RunMetrics> {
    let steady: Vec<&RunRecord> = records.iter().filter(|r| r.t_s >= scenario.metrics_from_s).collect();
    let temperature = tracking_stats(steady.iter().map(|r| (r.ti_c, r.ti_ref_c)))?;
    let hygrometry = tracking_stats(steady.iter().map(|r| (r.hi_pct, r.hi_ref_pct)))?;
    let post_fault = match scenario.fault.first_fault_time() {
        Some(t0) => {
            let after = records.iter().filter(|r| r.t_s >= t0);
            let stats = match scenario.fault_target {
                FaultTarget::Heating => tracking_stats(after.map(|r| (r.ti_c, r.ti_ref_c))),
                FaultTarget::Fog => tracking_stats(after.map(|r| (r.hi_pct, r.hi_ref_pct))),
            };
            // a fault starting after the run is simply not reported
            stats.ok()
        }
        None => None,
    };
    let in_band = steady
        .iter()
        .filter(|r| (r.ti_c - r.ti_ref_c).abs() <= scenario.tolerance_c)
        .count() as f64
        / steady.len() as f64;
    let res = scenario.settings.pwm_resolution_s;
    let heating_on_time_min = actuator_on_time(heat, res);
    let hi: Vec<f64> = records.iter().map(|r| r.hi_pct).collect();
    Ok(RunMetrics {
        name: scenario.name.clone(),
        controller: scenario.controller,
        estimator: scenario.estimator,
        duration_s: scenario.duration_s,
        metrics_from_s: scenario.metrics_from_s,
        temperature,
        hygrometry,
        post_fault,
        temperature_in_band_fraction: in_band,
        heating_on_time_min,
        fog_on_time_min: actuator_on_time(fog, res),
        heating_duty_fraction: heating_on_time_min * 60.0 / scenario.duration_s,
        hygrometry_violations: ViolationCounts::from_violations(&hygrometry_guard(&hi)),
        scenario: scenario.clone(),
    })
}
