use num_complex::Complex64;
use rayon::prelude::*;

use super::{runs_matrix, FrequencyGrid, LinearError, LinearOptions, TwoPortMatrix};
use crate::circuit::LadderNetwork;

/// Two-port scattering parameters at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SPoint {
    pub s11: Complex64,
    pub s21: Complex64,
    pub s12: Complex64,
    pub s22: Complex64,
}

impl SPoint {
    pub fn transmission_db(&self) -> f64 {
        20.0 * self.s21.norm().log10()
    }
}

/// Scattering data over a grid at one real reference impedance.
#[derive(Debug, Clone, PartialEq)]
pub struct SParameterSet {
    pub grid: FrequencyGrid,
    pub reference_impedance: f64,
    pub points: Vec<SPoint>,
}

impl SParameterSet {
    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        self.grid.frequencies()
    }
}

/// Standard chain-to-scattering conversion for equal real port impedances.
/// `frequency` is used only for diagnostics.
pub fn to_s_parameters(
    m: &TwoPortMatrix,
    z_ref: f64,
    frequency: f64,
) -> Result<SPoint, LinearError> {
    if !(z_ref.is_finite() && z_ref > 0.0) {
        return Err(LinearError::InvalidReference(z_ref));
    }
    let b = m.b / z_ref;
    let c = m.c * z_ref;
    let den = m.a + b + c + m.d;
    if !(den.norm() > 0.0) || !den.is_finite() {
        return Err(LinearError::SingularConversion {
            frequency,
            denominator: den,
        });
    }
    Ok(SPoint {
        s11: (m.a + b - c - m.d) / den,
        s21: 2.0 / den,
        s12: 2.0 * m.det() / den,
        s22: (-m.a + b - c + m.d) / den,
    })
}

/// S-parameters of a complete network, evaluated point-parallel.
pub fn network_s_parameters(
    network: &LadderNetwork,
    grid: &FrequencyGrid,
    z_ref: f64,
    opts: &LinearOptions,
) -> Result<SParameterSet, LinearError> {
    grid.validate()?;
    let runs = network.cell_runs();
    let points = (0..grid.points)
        .into_par_iter()
        .map(|i| {
            let f = grid.frequency(i);
            to_s_parameters(&runs_matrix(&runs, f, opts), z_ref, f)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SParameterSet {
        grid: *grid,
        reference_impedance: z_ref,
        points,
    })
}
