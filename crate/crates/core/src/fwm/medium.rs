use std::f64::consts::PI;

use num_complex::Complex64;

use super::FwmError;
use crate::circuit::LadderNetwork;
use crate::linear::{
    cell_matrix, network_dispersion, network_matrix, runs_matrix, select_branch, to_s_parameters,
    DispersionCurve, FrequencyGrid, LinearOptions,
};

/// Linear propagation of one mode: phase and amplitude attenuation per cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    pub wavenumber: f64,
    pub attenuation: f64,
    pub in_stopband: bool,
}

/// A line the coupled-mode system can propagate along. Positions are
/// continuous cell indices in `[0, length_cells]`.
pub trait Medium: Send + Sync {
    fn length_cells(&self) -> f64;
    /// Impedance used to map current to power.
    fn impedance(&self) -> f64;
    /// Highest frequency `channel` accepts.
    fn max_frequency(&self) -> f64;
    fn channel(&self, f: f64) -> Result<Channel, FwmError>;
    /// Positions of lumped sections, ascending.
    fn lumped_positions(&self) -> &[f64] {
        &[]
    }
    /// Excess transmission of each lumped section relative to the bare line,
    /// in the chain-matrix (`exp(+jwt)`) convention.
    fn lumped_transmission(&self, _f: f64) -> Result<Vec<Complex64>, FwmError> {
        Ok(Vec::new())
    }
}

/// Channel with lumped sections averaged over the length. Used for reporting
/// mismatch; propagation applies the sections where they sit.
pub fn effective_channel(medium: &dyn Medium, f: f64) -> Result<Channel, FwmError> {
    let mut ch = medium.channel(f)?;
    let len = medium.length_cells();
    for t in medium.lumped_transmission(f)? {
        ch.wavenumber += -t.arg() / len;
        ch.attenuation += -t.norm().ln() / len;
    }
    Ok(ch)
}

fn check_frequency(f: f64, max: f64) -> Result<(), FwmError> {
    if !(f.is_finite() && f > 0.0) {
        return Err(FwmError::InvalidFrequency {
            frequency: f,
            reason: "must be positive".into(),
        });
    }
    if f > max {
        return Err(FwmError::OutOfRange { frequency: f, max });
    }
    Ok(())
}

/// A Bloch stopband only counts when it attenuates the whole device by at
/// least this much (amplitude nepers, about 3 dB in power).
pub const STOPBAND_MIN_DEPTH_NP: f64 = 0.35;

fn lossless(opts: &LinearOptions) -> LinearOptions {
    LinearOptions {
        loss_tangent: 0.0,
        ..*opts
    }
}

fn base_impedance(network: &LadderNetwork, opts: &LinearOptions) -> Result<f64, FwmError> {
    let cell = network
        .cells()
        .next()
        .ok_or_else(|| FwmError::UnsupportedNetwork("empty network".into()))?;
    let l = cell.l0 * (1.0 + (opts.bias_current / cell.i_star).powi(2));
    Ok((l / cell.capacitance()).sqrt())
}

/// Periodic line described by its Bloch curve; exact Bloch evaluation at
/// each frequency with the branch taken from the curve.
#[derive(Debug, Clone)]
pub struct PeriodicMedium {
    period: LadderNetwork,
    curve: DispersionCurve,
    opts: LinearOptions,
    length: f64,
    z0: f64,
}

impl PeriodicMedium {
    pub fn new(
        network: &LadderNetwork,
        curve: DispersionCurve,
        opts: LinearOptions,
    ) -> Result<Self, FwmError> {
        let p = curve.cells_per_period;
        if p == 0 || p > network.total_cells() {
            return Err(FwmError::UnsupportedNetwork(format!(
                "period of {p} cells does not fit the network"
            )));
        }
        let period = network.slice_cells(0..p)?;
        Ok(Self {
            z0: base_impedance(network, &opts)?,
            period,
            curve,
            opts,
            length: network.total_cells() as f64,
        })
    }

    /// Builds the Bloch curve itself, 2 MHz resolution up to `max_frequency`.
    pub fn from_network(
        network: &LadderNetwork,
        opts: LinearOptions,
        max_frequency: f64,
    ) -> Result<Self, FwmError> {
        let points = ((max_frequency / 2e6).ceil() as usize).max(64);
        let grid = FrequencyGrid::new(max_frequency / points as f64, max_frequency, points)?;
        let curve = network_dispersion(network, &grid, &opts)?;
        Self::new(network, curve, opts)
    }

    pub fn dispersion(&self) -> &DispersionCurve {
        &self.curve
    }
}

impl Medium for PeriodicMedium {
    fn length_cells(&self) -> f64 {
        self.length
    }

    fn impedance(&self) -> f64 {
        self.z0
    }

    fn max_frequency(&self) -> f64 {
        self.curve.grid.stop
    }

    fn channel(&self, f: f64) -> Result<Channel, FwmError> {
        check_frequency(f, self.max_frequency())?;
        let runs = self.period.cell_runs();
        // below the first grid point the line is effectively uniform
        let reference = self.curve.phase_at(f).unwrap_or(0.0);
        let x = runs_matrix(&runs, f, &self.opts).half_trace();
        let b = select_branch(x, reference, self.opts.is_lossless(), false);
        let x0 = runs_matrix(&runs, f, &lossless(&self.opts)).half_trace();
        let n = self.curve.cells_per_period as f64;
        let depth = x0.re.abs().max(1.0).acosh() * self.length / n;
        Ok(Channel {
            wavenumber: b.beta / n,
            attenuation: b.alpha / n,
            in_stopband: depth >= STOPBAND_MIN_DEPTH_NP,
        })
    }
}

/// Cells closer than this belong to the same lumped section.
const SECTION_GAP_CELLS: usize = 32;

#[derive(Debug, Clone)]
struct Section {
    position: f64,
    loaded: LadderNetwork,
    bare: LadderNetwork,
}

/// Uniform ladder with clusters of shunt resonators applied as lumped
/// transmission factors at their positions.
#[derive(Debug, Clone)]
pub struct ResonatorLoadedMedium {
    base: LadderNetwork,
    period: Option<LadderNetwork>,
    sections: Vec<Section>,
    positions: Vec<f64>,
    opts: LinearOptions,
    length: f64,
    z0: f64,
    cutoff: f64,
}

impl ResonatorLoadedMedium {
    pub fn new(network: &LadderNetwork, opts: LinearOptions) -> Result<Self, FwmError> {
        let bare = network.without_resonators();
        let first = bare
            .cells()
            .next()
            .ok_or_else(|| FwmError::UnsupportedNetwork("empty network".into()))?;
        let (l0, c0) = (first.l0, first.capacitance());
        let uniform = bare.cells().all(|c| {
            ((c.l0 - l0) / l0).abs() < 1e-12
                && ((c.capacitance() - c0) / c0).abs() < 1e-12
                && c.i_star == first.i_star
        });
        if !uniform {
            return Err(FwmError::UnsupportedNetwork(
                "resonator-loaded propagation needs a uniform host ladder".into(),
            ));
        }
        let base = bare.slice_cells(0..1)?;

        let cells = network.resonator_cells();
        let mut clusters: Vec<(usize, usize)> = Vec::new();
        for &i in &cells {
            match clusters.last_mut() {
                Some((_, hi)) if i - *hi <= SECTION_GAP_CELLS => *hi = i,
                _ => clusters.push((i, i)),
            }
        }
        let sections = clusters
            .iter()
            .map(|&(lo, hi)| {
                Ok(Section {
                    position: (lo + hi + 1) as f64 / 2.0,
                    loaded: network.slice_cells(lo..hi + 1)?,
                    bare: bare.slice_cells(lo..hi + 1)?,
                })
            })
            .collect::<Result<Vec<_>, FwmError>>()?;

        let period = match network.period_cells() {
            Some(p) if p < network.total_cells() || !cells.is_empty() => {
                Some(network.slice_cells(0..p)?)
            }
            _ => None,
        };
        let l = l0 * (1.0 + (opts.bias_current / first.i_star).powi(2));
        Ok(Self {
            positions: sections.iter().map(|s| s.position).collect(),
            z0: (l / c0).sqrt(),
            cutoff: 1.0 / (PI * (l * c0).sqrt()),
            length: network.total_cells() as f64,
            base,
            period,
            sections,
            opts,
        })
    }
}

impl Medium for ResonatorLoadedMedium {
    fn length_cells(&self) -> f64 {
        self.length
    }

    fn impedance(&self) -> f64 {
        self.z0
    }

    fn max_frequency(&self) -> f64 {
        self.cutoff
    }

    fn channel(&self, f: f64) -> Result<Channel, FwmError> {
        check_frequency(f, self.max_frequency())?;
        let cell = self.base.cells().next().expect("base has one cell");
        let x = cell_matrix(&cell, f, &self.opts).half_trace();
        let reference = 2.0 * PI * f * (cell.l0 * cell.capacitance()).sqrt();
        let b = select_branch(x, reference, self.opts.is_lossless(), false);
        let in_stopband = match &self.period {
            Some(p) => {
                let x0 = network_matrix(p, f, &lossless(&self.opts))
                    .half_trace()
                    .re
                    .abs();
                x0.max(1.0).acosh() * self.length / p.total_cells() as f64 >= STOPBAND_MIN_DEPTH_NP
            }
            None => false,
        };
        Ok(Channel {
            wavenumber: b.beta,
            attenuation: b.alpha,
            in_stopband,
        })
    }

    fn lumped_positions(&self) -> &[f64] {
        &self.positions
    }

    fn lumped_transmission(&self, f: f64) -> Result<Vec<Complex64>, FwmError> {
        check_frequency(f, self.max_frequency())?;
        self.sections
            .iter()
            .map(|s| {
                let loaded =
                    to_s_parameters(&network_matrix(&s.loaded, f, &self.opts), self.z0, f)?;
                let bare = to_s_parameters(&network_matrix(&s.bare, f, &self.opts), self.z0, f)?;
                Ok(loaded.s21 / bare.s21)
            })
            .collect()
    }
}

/// Reference line with `k` exactly proportional to frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionlessMedium {
    /// Delay per cell, seconds.
    pub delay_per_cell: f64,
    pub length: f64,
    pub z0: f64,
    pub max_frequency: f64,
}

impl DispersionlessMedium {
    /// Long-wavelength limit of a uniform ladder of the given cell.
    pub fn matching(l: f64, c: f64, length: f64) -> Self {
        Self {
            delay_per_cell: (l * c).sqrt(),
            length,
            z0: (l / c).sqrt(),
            max_frequency: f64::INFINITY,
        }
    }
}

impl Medium for DispersionlessMedium {
    fn length_cells(&self) -> f64 {
        self.length
    }

    fn impedance(&self) -> f64 {
        self.z0
    }

    fn max_frequency(&self) -> f64 {
        self.max_frequency
    }

    fn channel(&self, f: f64) -> Result<Channel, FwmError> {
        check_frequency(f, self.max_frequency)?;
        Ok(Channel {
            wavenumber: 2.0 * PI * f * self.delay_per_cell,
            attenuation: 0.0,
            in_stopband: false,
        })
    }
}

/// Picks the propagation model for a network: lumped resonator sections when
/// it has any, otherwise Bloch propagation over its period.
pub fn medium_for_network(
    network: &LadderNetwork,
    opts: LinearOptions,
    max_frequency: f64,
) -> Result<Box<dyn Medium>, FwmError> {
    if !network.resonator_cells().is_empty() {
        return Ok(Box::new(ResonatorLoadedMedium::new(network, opts)?));
    }
    let network = if network.period_cells().is_some() {
        std::borrow::Cow::Borrowed(network)
    } else {
        let first = network.slice_cells(0..1)?;
        let uniform = network.cells().all(|c| {
            let f = first.cells().next().expect("one cell");
            c.l0 == f.l0 && c.capacitance() == f.capacitance()
        });
        if !uniform {
            return Err(FwmError::UnsupportedNetwork(
                "non-uniform network without a period annotation".into(),
            ));
        }
        std::borrow::Cow::Owned(LadderNetwork::new(network.elements().to_vec(), Some(1))?)
    };
    Ok(Box::new(PeriodicMedium::from_network(
        &network,
        opts,
        max_frequency,
    )?))
}
