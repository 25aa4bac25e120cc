//! Small-signal frequency-domain analysis of ladder networks.
//!
//! Everything here works on chain (ABCD) matrices with the `e^{jωt}` phasor
//! convention: a series impedance `Z` is `[[1, Z], [0, 1]]`, a shunt
//! admittance `Y` is `[[1, 0], [Y, 1]]`, and a matched delay line has
//! `s21 = e^{-jθ}`.

use std::f64::consts::PI;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Cell, Element, LadderNetwork, ResonatorRealization};

mod bloch;
mod resonator;
mod sparams;

pub use bloch::{
    bloch_dispersion, find_stopbands, network_dispersion, select_branch, BlochPoint,
    DispersionCurve, Stopband, StopbandReport,
};
pub use resonator::{resonator_phase_shift, PhaseShift};
pub use sparams::{network_s_parameters, to_s_parameters, SParameterSet, SPoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinearError {
    #[error("cannot cascade an empty list of two-ports")]
    EmptyCascade,
    #[error(
        "singular S-parameter conversion at {frequency} Hz (a + b/z + c z + d = {denominator})"
    )]
    SingularConversion {
        frequency: f64,
        denominator: Complex64,
    },
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),
    #[error("reference impedance must be positive, got {0}")]
    InvalidReference(f64),
    #[error("network has no period annotation; Bloch analysis needs one")]
    MissingPeriod,
}

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Chain matrix of a two-port at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPortMatrix {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl TwoPortMatrix {
    pub const IDENTITY: Self = Self {
        a: Complex64 { re: 1.0, im: 0.0 },
        b: Complex64 { re: 0.0, im: 0.0 },
        c: Complex64 { re: 0.0, im: 0.0 },
        d: Complex64 { re: 1.0, im: 0.0 },
    };

    pub fn series(z: Complex64) -> Self {
        Self {
            b: z,
            ..Self::IDENTITY
        }
    }

    pub fn shunt(y: Complex64) -> Self {
        Self {
            c: y,
            ..Self::IDENTITY
        }
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn half_trace(&self) -> Complex64 {
        (self.a + self.d) * 0.5
    }

    /// `self^n` by repeated squaring.
    pub fn pow(self, mut n: usize) -> Self {
        let mut base = self;
        let mut acc = Self::IDENTITY;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }
}

impl Mul for TwoPortMatrix {
    type Output = Self;

    fn mul(self, r: Self) -> Self {
        Self {
            a: self.a * r.a + self.b * r.c,
            b: self.a * r.b + self.b * r.d,
            c: self.c * r.a + self.d * r.c,
            d: self.c * r.b + self.d * r.d,
        }
    }
}

/// Linear evaluation settings.
///
/// `bias_current` linearizes every kinetic inductor at `L(I_bias)`;
/// `loss_tangent` applies to every capacitor (cell and resonator).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinearOptions {
    pub bias_current: f64,
    pub loss_tangent: f64,
}

impl LinearOptions {
    pub fn is_lossless(&self) -> bool {
        self.loss_tangent == 0.0
    }

    fn capacitor_admittance(&self, omega: f64, c: f64) -> Complex64 {
        Complex64::new(omega * c * self.loss_tangent, omega * c)
    }
}

fn shunt_admittance(element: &Element, omega: f64, opts: &LinearOptions) -> Complex64 {
    match *element {
        Element::SeriesInductor { .. } => Complex64::new(0.0, 0.0),
        Element::ShuntCapacitor { c } => opts.capacitor_admittance(omega, c),
        Element::ShuntResonator {
            resonant_frequency,
            q,
            multiplicity,
        } => {
            let r = ResonatorRealization::new(resonant_frequency, q);
            let z =
                J * omega * r.inductance + 1.0 / opts.capacitor_admittance(omega, r.capacitance);
            multiplicity as f64 / z
        }
    }
}

pub fn element_matrix(element: &Element, f: f64, opts: &LinearOptions) -> TwoPortMatrix {
    let omega = 2.0 * PI * f;
    match *element {
        Element::SeriesInductor { l0, i_star } => {
            let l = l0 * (1.0 + (opts.bias_current / i_star).powi(2));
            TwoPortMatrix::series(J * omega * l)
        }
        _ => TwoPortMatrix::shunt(shunt_admittance(element, omega, opts)),
    }
}

/// Ordered product, input port first.
pub fn cascade(matrices: &[TwoPortMatrix]) -> Result<TwoPortMatrix, LinearError> {
    let (first, rest) = matrices.split_first().ok_or(LinearError::EmptyCascade)?;
    Ok(rest.iter().fold(*first, |acc, m| acc * *m))
}

pub fn cell_matrix(cell: &Cell<'_>, f: f64, opts: &LinearOptions) -> TwoPortMatrix {
    let omega = 2.0 * PI * f;
    let l = cell.l0 * (1.0 + (opts.bias_current / cell.i_star).powi(2));
    let y: Complex64 = cell
        .shunts
        .iter()
        .map(|e| shunt_admittance(e, omega, opts))
        .sum();
    let zl = J * omega * l;
    TwoPortMatrix {
        a: 1.0 + zl * y,
        b: zl,
        c: y,
        d: Complex64::new(1.0, 0.0),
    }
}

/// Chain matrix of the whole network at `f`.
pub fn network_matrix(network: &LadderNetwork, f: f64, opts: &LinearOptions) -> TwoPortMatrix {
    runs_matrix(&network.cell_runs(), f, opts)
}

/// Chain matrix of precomputed cell runs (see [`LadderNetwork::cell_runs`]).
pub fn runs_matrix(runs: &[(Cell<'_>, usize)], f: f64, opts: &LinearOptions) -> TwoPortMatrix {
    runs.iter().fold(TwoPortMatrix::IDENTITY, |acc, (cell, n)| {
        acc * cell_matrix(cell, f, opts).pow(*n)
    })
}

/// Linearly spaced frequency points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl FrequencyGrid {
    pub fn new(start: f64, stop: f64, points: usize) -> Result<Self, LinearError> {
        let grid = Self {
            start,
            stop,
            points,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// 10 001 points over 0.1–20 GHz.
    pub fn device_default() -> Self {
        Self {
            start: 0.1e9,
            stop: 20e9,
            points: 10_001,
        }
    }

    pub fn validate(&self) -> Result<(), LinearError> {
        if !(self.start.is_finite() && self.start > 0.0) {
            return Err(LinearError::InvalidGrid(format!(
                "start must be positive, got {}",
                self.start
            )));
        }
        if !(self.stop.is_finite() && self.stop > self.start) {
            return Err(LinearError::InvalidGrid(format!(
                "stop {} must exceed start {}",
                self.stop, self.start
            )));
        }
        if self.points < 2 {
            return Err(LinearError::InvalidGrid(format!(
                "need at least 2 points, got {}",
                self.points
            )));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.points - 1) as f64
    }

    pub fn frequency(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.stop
        } else {
            self.start + (self.stop - self.start) * i as f64 / (self.points - 1) as f64
        }
    }

    pub fn frequencies(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.points).map(|i| self.frequency(i))
    }

    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            start: self.start + offset,
            stop: self.stop + offset,
            points: self.points,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{expand_fishbone, FishboneSpec};

    fn assert_close(a: Complex64, b: Complex64, tol: f64) {
        assert!((a - b).norm() <= tol * b.norm().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn inductor_matrix_at_zero_and_i_star() {
        let e = Element::SeriesInductor {
            l0: 50e-12,
            i_star: 0.01,
        };
        let f = 6e9;
        let omega = 2.0 * PI * f;
        let m0 = element_matrix(&e, f, &LinearOptions::default());
        assert_close(m0.b, J * omega * 50e-12, 1e-15);
        assert_eq!(m0.a, Complex64::new(1.0, 0.0));
        let m1 = element_matrix(
            &e,
            f,
            &LinearOptions {
                bias_current: 0.01,
                loss_tangent: 0.0,
            },
        );
        assert_close(m1.b, J * omega * 100e-12, 1e-15);
    }

    #[test]
    fn capacitor_matrix_hand_value() {
        let m = element_matrix(
            &Element::ShuntCapacitor { c: 20e-15 },
            6e9,
            &LinearOptions::default(),
        );
        // 2π · 6 GHz · 20 fF = 7.5398e-4 S
        assert!(m.c.re == 0.0);
        assert!((m.c.im - 7.5398e-4).abs() < 1e-8, "{}", m.c.im);
    }

    #[test]
    fn cascade_basics() {
        assert_eq!(cascade(&[]), Err(LinearError::EmptyCascade));
        let m = element_matrix(
            &Element::ShuntCapacitor { c: 1e-15 },
            1e9,
            &LinearOptions::default(),
        );
        assert_eq!(cascade(&[m]).unwrap(), m);
        let half = network_matrix(
            &expand_fishbone(&FishboneSpec {
                num_periods: 4,
                loaded_cells: 0,
                loaded_cells_every_third: 0,
                ..FishboneSpec::nominal()
            })
            .unwrap(),
            3e9,
            &LinearOptions::default(),
        );
        let whole = cascade(&[half, half]).unwrap();
        assert!((whole.det() - 1.0).norm() < 1e-9);
    }

    #[test]
    fn power_matches_repeated_product() {
        let cell = TwoPortMatrix {
            a: Complex64::new(0.99, 0.01),
            b: Complex64::new(0.0, 1.9),
            c: Complex64::new(0.0, 0.007),
            d: Complex64::new(1.0, 0.0),
        };
        let mut direct = TwoPortMatrix::IDENTITY;
        for _ in 0..37 {
            direct = direct * cell;
        }
        let p = cell.pow(37);
        assert_close(p.a, direct.a, 1e-12);
        assert_close(p.b, direct.b, 1e-12);
        assert_close(p.c, direct.c, 1e-12);
        assert_close(p.d, direct.d, 1e-12);
        assert_eq!(cell.pow(0), TwoPortMatrix::IDENTITY);
    }

    #[test]
    fn network_matrix_equals_elementwise_cascade() {
        let spec = FishboneSpec {
            num_periods: 5,
            ..FishboneSpec::nominal()
        };
        let net = expand_fishbone(&spec).unwrap();
        let opts = LinearOptions::default();
        let f = 7.3e9;
        let elementwise: Vec<_> = net
            .elements()
            .iter()
            .map(|e| element_matrix(e, f, &opts))
            .collect();
        let direct = cascade(&elementwise).unwrap();
        let fast = network_matrix(&net, f, &opts);
        assert_close(fast.a, direct.a, 1e-10);
        assert_close(fast.b, direct.b, 1e-10);
        assert_close(fast.c, direct.c, 1e-10);
        assert_close(fast.d, direct.d, 1e-10);
    }

    #[test]
    fn grid_validation() {
        assert!(FrequencyGrid::new(0.0, 1.0, 3).is_err());
        assert!(FrequencyGrid::new(2.0, 1.0, 3).is_err());
        assert!(FrequencyGrid::new(1.0, 2.0, 1).is_err());
        let g = FrequencyGrid::new(1e9, 2e9, 11).unwrap();
        assert_eq!(g.frequency(0), 1e9);
        assert_eq!(g.frequency(10), 2e9);
        assert!((g.step() - 1e8).abs() < 1e-3);
    }
}
