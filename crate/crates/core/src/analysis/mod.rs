//! Figures of merit, calibration, sweeps and design comparison.

mod calibrate;
mod compare;
mod metrics;
mod pipeline;
mod sweep;

use thiserror::Error;

use crate::circuit::CircuitError;
use crate::fwm::FwmError;
use crate::linear::LinearError;

pub use calibrate::{calibrate_istar, CalibrationResult, CalibrationSettings, PeakGainFunction};
pub use compare::{
    compare_designs, cpw_reference, matched_pump_power, Comparison, ComparisonRow, OperatingSummary,
};
pub use metrics::{
    gain_metrics, metrics_from_samples, smooth_profile, Dip, GainMetrics, MetricOptions,
    SmoothedProfile,
};
pub use pipeline::{Design, Pipeline};
pub use sweep::{sweep, sweep_with, SweepAxis, SweepParameter, SweepPoint, SweepResult};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("invalid gain profile: {0}")]
    InvalidProfile(String),
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("target {target} dB outside the achievable range [{low:.3}, {high:.3}] dB over [{:e}, {:e}]", bracket.0, bracket.1)]
    BracketFailure {
        target: f64,
        low: f64,
        high: f64,
        bracket: (f64, f64),
    },
    #[error(
        "calibration did not converge: best I* = {best_i_star:e} A, residual {residual_db:.4} dB"
    )]
    NotConverged { best_i_star: f64, residual_db: f64 },
    #[error(transparent)]
    Fwm(#[from] FwmError),
    #[error(transparent)]
    Linear(#[from] LinearError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}
