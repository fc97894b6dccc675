//! Model-free control of a greenhouse climate.
//!
//! The controller treats the plant as `ẏ = F + α·u` and re-estimates `F` from a
//! short sliding window of measurements, so no physical model is needed. The
//! [`greenhouse`] module provides a simple synthetic climate to close the loop
//! on, and [`harness`] runs whole nights from JSON scenarios.

pub mod actuation;
pub mod control;
pub mod error;
pub mod estimation;
pub mod fault;
pub mod greenhouse;
pub mod harness;
pub mod metrics;

pub use control::{
    ip_control, ipi_control, predict_error, ConstantReference, GainSet, IntegralAccumulator, IntelligentController,
    PiecewiseConstantReference, ReferencePoint, ReferenceSignal, TrackingError, UltraLocalModel,
};
pub use error::{Error, Result};
pub use estimation::{
    algebraic_estimate, closed_loop_estimate, EstimatorConfig, EstimatorKind, SlidingWindow, WindowEntry,
};
pub use fault::{apply_fault, effective_f, FaultProfile, FaultSegment};
