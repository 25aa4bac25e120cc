//! Four-wave-mixing propagation along the line.

pub mod cme;
mod gain;
mod harmonic;
mod medium;
pub mod ode;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::CircuitError;
use crate::linear::LinearError;

pub use cme::{coupled_mode_rhs, Amplitudes, CoupledModes};
pub use gain::{
    analytic_gain_undepleted, integrate_gain, phase_mismatch, propagate, GainOptions, GainPoint,
    GainProfile, GainSolver, LumpedKick, PhaseMismatch, Pump,
};
pub use harmonic::{third_harmonic_scan, HarmonicOptions, HarmonicScan};
pub use medium::{
    effective_channel, medium_for_network, Channel, DispersionlessMedium, Medium, PeriodicMedium,
    ResonatorLoadedMedium, STOPBAND_MIN_DEPTH_NP,
};

#[derive(Debug, Error)]
pub enum FwmError {
    #[error("pump at {frequency:.6e} Hz lies inside a stopband")]
    PumpInStopband { frequency: f64 },
    #[error("invalid frequency {frequency:.6e} Hz: {reason}")]
    InvalidFrequency { frequency: f64, reason: String },
    #[error("frequency {frequency:.6e} Hz is outside the dispersion data (max {max:.6e} Hz)")]
    OutOfRange { frequency: f64, max: f64 },
    #[error("unsupported network: {0}")]
    UnsupportedNetwork(String),
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error(
        "integration failed at signal {frequency:.6e} Hz ({failures} point(s) failed): {source}"
    )]
    Integration {
        frequency: f64,
        failures: usize,
        #[source]
        source: ode::OdeError,
    },
    #[error(transparent)]
    Linear(#[from] LinearError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// Kerr phase per cell per watt at a reference (pump) frequency. Other
/// modes scale linearly with their frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KerrCoefficient {
    pub gamma: f64,
    pub reference_frequency: f64,
}

impl KerrCoefficient {
    pub fn new(gamma: f64, reference_frequency: f64) -> Result<Self, FwmError> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(FwmError::InvalidParameter {
                name: "gamma",
                reason: format!("must be positive, got {gamma}"),
            });
        }
        if !(reference_frequency.is_finite() && reference_frequency > 0.0) {
            return Err(FwmError::InvalidParameter {
                name: "reference_frequency",
                reason: format!("must be positive, got {reference_frequency}"),
            });
        }
        Ok(Self {
            gamma,
            reference_frequency,
        })
    }

    /// gamma = k / (2 I*^2 Z0), from L(I) = L0 (1 + I^2/I*^2) and P = I^2 Z0.
    pub fn from_line(
        k_cell: f64,
        i_star: f64,
        z0: f64,
        reference_frequency: f64,
    ) -> Result<Self, FwmError> {
        if !(i_star.is_finite() && i_star > 0.0) {
            return Err(FwmError::InvalidParameter {
                name: "i_star",
                reason: format!("must be positive, got {i_star}"),
            });
        }
        Self::new(k_cell / (2.0 * i_star * i_star * z0), reference_frequency)
    }

    pub fn for_medium(
        medium: &dyn Medium,
        pump_frequency: f64,
        i_star: f64,
    ) -> Result<Self, FwmError> {
        let ch = medium.channel(pump_frequency)?;
        Self::from_line(ch.wavenumber, i_star, medium.impedance(), pump_frequency)
    }

    pub fn at(&self, f: f64) -> f64 {
        self.gamma * f / self.reference_frequency
    }
}

/// Frequency-locked pump, signal, idler and third-harmonic amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState {
    pub amplitudes: Amplitudes,
    pub pump_frequency: f64,
    pub signal_frequency: f64,
}

impl ModeState {
    pub fn idler_frequency(&self) -> f64 {
        2.0 * self.pump_frequency - self.signal_frequency
    }

    pub fn third_frequency(&self) -> f64 {
        3.0 * self.pump_frequency
    }

    pub fn frequencies(&self) -> [f64; 4] {
        [
            self.pump_frequency,
            self.signal_frequency,
            self.idler_frequency(),
            self.third_frequency(),
        ]
    }

    pub fn powers(&self) -> [f64; 4] {
        self.amplitudes.map(|a| a.norm_sqr())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kerr_from_line() {
        let k = KerrCoefficient::from_line(0.2, 0.01, 50.0, 6e9).unwrap();
        assert!((k.gamma - 0.2 / (2.0 * 1e-4 * 50.0)).abs() < 1e-12);
        assert!((k.at(12e9) - 2.0 * k.gamma).abs() < 1e-12);
        assert!(KerrCoefficient::from_line(0.2, 0.0, 50.0, 6e9).is_err());
        assert!(KerrCoefficient::new(-1.0, 6e9).is_err());
    }

    #[test]
    fn idler_is_frequency_locked() {
        let m = ModeState {
            amplitudes: [Default::default(); 4],
            pump_frequency: 6.22e9,
            signal_frequency: 5.1e9,
        };
        assert_eq!(m.idler_frequency(), 2.0 * 6.22e9 - 5.1e9);
        assert_eq!(m.third_frequency(), 3.0 * 6.22e9);
    }
}
