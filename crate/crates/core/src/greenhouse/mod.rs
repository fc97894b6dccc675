//! Synthetic greenhouse used as the closed-loop test bed.
//!
//! The controllers never see anything from this module except sensor readings.

mod plant;
mod reference;
mod sensors;
mod weather;

pub use plant::{
    plant_derivatives, rk4_step, step_plant, step_plant_with, ActuatorInputs, GreenhouseParams, PlantState,
    MAX_SUBSTEP_S,
};
pub use reference::{PhaseRow, ReferenceCell, ReferenceSchedule, Species};
pub use sensors::{read_sensors, SensorModel};
pub use weather::{
    load_weather_csv, synth_night, synth_night_weather, NightWeatherConfig, WeatherPoint, WeatherTrace,
    WEATHER_COLUMNS,
};
