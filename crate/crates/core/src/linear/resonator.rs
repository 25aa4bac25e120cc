use std::f64::consts::PI;

use super::{network_matrix, to_s_parameters, LinearError, LinearOptions};
use crate::circuit::{Element, LadderNetwork};

/// Excess transmission of a resonator-loaded section over the same section
/// with its resonators removed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseShift {
    /// Additional phase delay, radians (positive: the loaded section lags).
    pub radians: f64,
    pub insertion_loss_db: f64,
    /// Set when `f` is at or above the lowest resonance in the section, where
    /// the section acts as a stopband rather than a phase shifter.
    pub outside_operating_region: bool,
}

impl PhaseShift {
    pub fn degrees(&self) -> f64 {
        self.radians * 180.0 / PI
    }
}

pub fn resonator_phase_shift(
    block: &LadderNetwork,
    f: f64,
    z_ref: f64,
    opts: &LinearOptions,
) -> Result<PhaseShift, LinearError> {
    let loaded = to_s_parameters(&network_matrix(block, f, opts), z_ref, f)?;
    let bare = to_s_parameters(
        &network_matrix(&block.without_resonators(), f, opts),
        z_ref,
        f,
    )?;
    let ratio = loaded.s21 / bare.s21;
    let lowest = block
        .elements()
        .iter()
        .filter_map(|e| match e {
            Element::ShuntResonator {
                resonant_frequency, ..
            } => Some(*resonant_frequency),
            _ => None,
        })
        .fold(f64::INFINITY, f64::min);
    Ok(PhaseShift {
        radians: -ratio.arg(),
        insertion_loss_db: -20.0 * ratio.norm().log10(),
        outside_operating_region: f >= lowest,
    })
}
