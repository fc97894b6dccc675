//! Scenario-driven simulation of the controlled greenhouse.

mod compare;
mod demo;
mod runner;
mod scenario;

pub use compare::{compare_metrics, compare_scenarios, Comparison, Deltas, RunSummary, Verdict, Verdicts};
pub use demo::{simulate_first_order_loop, write_demo_csv, DemoSample, DemoSignal, DemoSpec};
pub use runner::{
    run_scenario, PeriodTruth, RunMetrics, RunOutput, RunRecord, METRICS_FILE, PWM_FILE, TIMESERIES_FILE,
};
pub use scenario::{
    ControllerKind, ControllerSettings, FaultTarget, Scenario, TemperatureReference, WeatherSource,
};
