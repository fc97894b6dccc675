use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::actuation::FogSchedule;
use crate::control::{GainSet, PiecewiseConstantReference, UltraLocalModel};
use crate::error::{Error, Result};
use crate::estimation::{EstimatorConfig, EstimatorKind, SlidingWindow};
use crate::fault::FaultProfile;
use crate::greenhouse::{
    load_weather_csv, synth_night, GreenhouseParams, NightWeatherConfig, PlantState, ReferenceSchedule, SensorModel,
    Species, WeatherTrace,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    #[default]
    Ip,
    Ipi,
    Boolean,
}

/// Controller settings shared by the temperature and hygrometry channels.
///
/// Rates (`k_p`, `k_i`, F) are per `time_unit_s` seconds; the defaults are per
/// minute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerSettings {
    pub alpha: f64,
    pub k_p: f64,
    pub k_i: f64,
    /// Estimation window δ, minutes.
    pub window_min: f64,
    pub sample_period_s: f64,
    pub time_unit_s: f64,
    pub pwm_resolution_s: f64,
}

impl Default for ControllerSettings {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            k_p: 2.0,
            k_i: 0.0,
            window_min: 6.0,
            sample_period_s: 60.0,
            time_unit_s: 60.0,
            pwm_resolution_s: 1.0,
        }
    }
}

impl ControllerSettings {
    pub fn model(&self) -> Result<UltraLocalModel> {
        UltraLocalModel::new(self.alpha)
    }

    pub fn gains(&self) -> Result<GainSet> {
        GainSet::new(self.k_p, self.k_i)
    }

    pub fn window_s(&self) -> f64 {
        self.window_min * 60.0
    }

    pub fn estimator_config(&self) -> Result<EstimatorConfig> {
        EstimatorConfig::with_time_unit(self.window_s(), self.alpha, self.k_p, self.time_unit_s)
    }

    pub fn new_window(&self) -> Result<SlidingWindow> {
        SlidingWindow::for_span(self.window_s(), self.sample_period_s)
    }

    pub fn slots_per_period(&self) -> Result<usize> {
        let slots = self.sample_period_s / self.pwm_resolution_s;
        let n = slots.round();
        if !(self.pwm_resolution_s > 0.0) || n < 1.0 || (slots - n).abs() > 1e-9 * n {
            return Err(Error::config(format!(
                "PWM resolution {} s must divide the sample period {} s",
                self.pwm_resolution_s, self.sample_period_s
            )));
        }
        Ok(n as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TemperatureReference {
    Constant { value_c: f64 },
    /// `(start_s, value_c)` pairs.
    Steps { steps: Vec<(f64, f64)> },
    /// Crop table lookup, held for the whole run.
    Species {
        species: Species,
        weeks_after_plant: f64,
        #[serde(default)]
        is_day: bool,
    },
}

impl Default for TemperatureReference {
    fn default() -> Self {
        TemperatureReference::Constant { value_c: 18.0 }
    }
}

impl TemperatureReference {
    pub fn build(&self) -> Result<PiecewiseConstantReference> {
        match self {
            TemperatureReference::Constant { value_c } => PiecewiseConstantReference::new(vec![(0.0, *value_c)]),
            TemperatureReference::Steps { steps } => PiecewiseConstantReference::new(steps.clone()),
            TemperatureReference::Species {
                species,
                weeks_after_plant,
                is_day,
            } => {
                let value = ReferenceSchedule::standard().reference_at(*species, *weeks_after_plant, *is_day)?;
                PiecewiseConstantReference::new(vec![(0.0, value)])
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeatherSource {
    /// Generated night; its duration always follows the scenario's.
    Synthetic {
        #[serde(default = "default_weather_seed")]
        seed: u64,
        #[serde(default)]
        night: NightWeatherConfig,
    },
    /// CSV file, relative paths resolved against the scenario file.
    File { path: PathBuf },
}

fn default_weather_seed() -> u64 {
    1
}

impl Default for WeatherSource {
    fn default() -> Self {
        WeatherSource::Synthetic {
            seed: default_weather_seed(),
            night: NightWeatherConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultTarget {
    #[default]
    Heating,
    Fog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub duration_s: f64,
    pub seed: u64,
    pub controller: ControllerKind,
    pub estimator: EstimatorKind,
    pub settings: ControllerSettings,
    pub temperature_reference: TemperatureReference,
    pub hygrometry_reference_pct: f64,
    /// Half-band of the Boolean thermostat and of the in-band metric, °C.
    pub tolerance_c: f64,
    pub fog_schedule: FogSchedule,
    pub weather: WeatherSource,
    pub fault: FaultProfile,
    pub fault_target: FaultTarget,
    pub plant: GreenhouseParams,
    pub initial_state: PlantState,
    pub sensors: SensorModel,
    /// Opening, held constant (0..0.5).
    pub opening: f64,
    /// Shade, held constant (0..1).
    pub shade: f64,
    /// Tracking statistics skip samples before this time.
    pub metrics_from_s: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "scenario".into(),
            duration_s: 43_200.0,
            seed: 0,
            controller: ControllerKind::Ip,
            estimator: EstimatorKind::ClosedLoop,
            settings: ControllerSettings::default(),
            temperature_reference: TemperatureReference::default(),
            hygrometry_reference_pct: 60.0,
            tolerance_c: 0.5,
            fog_schedule: FogSchedule::default(),
            weather: WeatherSource::default(),
            fault: FaultProfile::none(),
            fault_target: FaultTarget::Heating,
            plant: GreenhouseParams::default(),
            initial_state: PlantState::default(),
            sensors: SensorModel::default(),
            opening: 0.0,
            shade: 0.0,
            metrics_from_s: 3600.0,
        }
    }
}

impl Scenario {
    /// Reads a scenario file, resolves relative weather paths and validates it.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut scenario: Scenario = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        if let WeatherSource::File { path: weather } = &mut scenario.weather {
            if weather.is_relative() {
                if let Some(dir) = path.parent() {
                    *weather = dir.join(&*weather);
                }
            }
        }
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.settings;
        s.model()?;
        s.gains()?;
        s.estimator_config()?;
        s.new_window()?;
        s.slots_per_period()?;
        match self.controller {
            ControllerKind::Ip if s.k_i != 0.0 => {
                return Err(Error::config("controller `ip` requires k_i = 0; use `ipi` for an integral term"))
            }
            ControllerKind::Ipi if s.k_i <= 0.0 => return Err(Error::config("controller `ipi` requires k_i > 0")),
            _ => {}
        }
        let periods = self.duration_s / s.sample_period_s;
        if !(self.duration_s > 0.0) || (periods - periods.round()).abs() > 1e-9 * periods {
            return Err(Error::config(format!(
                "duration {} s is not a positive multiple of the {} s control period",
                self.duration_s, s.sample_period_s
            )));
        }
        if !(self.metrics_from_s >= 0.0 && self.metrics_from_s < self.duration_s) {
            return Err(Error::config(format!(
                "metrics_from_s {} must lie within the {} s run",
                self.metrics_from_s, self.duration_s
            )));
        }
        if !(self.tolerance_c > 0.0) {
            return Err(Error::config("tolerance must be positive"));
        }
        if !(0.0..=0.5).contains(&self.opening) || !(0.0..=1.0).contains(&self.shade) {
            return Err(Error::config("opening must be within [0, 0.5] and shade within [0, 1]"));
        }
        if !(0.0..=100.0).contains(&self.initial_state.hi) {
            return Err(Error::config("initial humidity must be within [0, 100]"));
        }
        self.plant.validate()?;
        self.temperature_reference.build()?;
        if let WeatherSource::File { path } = &self.weather {
            if !path.is_file() {
                return Err(Error::config(format!("weather file {} does not exist", path.display())));
            }
        }
        Ok(())
    }

    pub fn periods(&self) -> usize {
        (self.duration_s / self.settings.sample_period_s).round() as usize
    }

    pub fn weather_trace(&self) -> Result<WeatherTrace> {
        match &self.weather {
            WeatherSource::Synthetic { seed, night } => {
                let cfg = NightWeatherConfig {
                    duration_s: self.duration_s,
                    ..*night
                };
                synth_night(&cfg, *seed)
            }
            WeatherSource::File { path } => load_weather_csv(path),
        }
    }
}
