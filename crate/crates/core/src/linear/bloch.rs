//! Floquet analysis of periodic ladders.
//!
//! For a period with chain matrix `M`, Bloch waves satisfy
//! `cosh γ = (a + d)/2` with `γ = α + jβ` per period. The principal `acosh`
//! only fixes `β` modulo `2π` and up to sign, so the phase is unwrapped along
//! the grid starting from `β = 0` at DC.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{runs_matrix, FrequencyGrid, LinearError, LinearOptions, TwoPortMatrix};
use crate::circuit::LadderNetwork;

const TWO_PI: f64 = 2.0 * PI;

/// Bloch propagation constant of one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochPoint {
    /// Nepers per period, never negative.
    pub alpha: f64,
    /// Radians per period.
    pub beta: f64,
}

/// Branch of `acosh(x)` whose phase is closest to `reference`.
///
/// With `monotone` set, branches at or above `reference` are preferred, which
/// resolves the tie at lossless band edges in favour of non-decreasing phase.
pub fn select_branch(x: Complex64, reference: f64, lossless: bool, monotone: bool) -> BlochPoint {
    let (alpha, bases): (f64, [Option<f64>; 2]) = if lossless {
        let xr = x.re;
        if xr.abs() <= 1.0 {
            let b = xr.acos();
            (0.0, [Some(b), Some(-b)])
        } else if xr > 1.0 {
            (xr.acosh(), [Some(0.0), None])
        } else {
            ((-xr).acosh(), [Some(PI), None])
        }
    } else {
        let mut g = x.acosh();
        if g.re < 0.0 {
            g = -g;
        }
        let second = if g.re.abs() < 1e-14 {
            Some(-g.im)
        } else {
            None
        };
        (g.re, [Some(g.im), second])
    };

    let mut best: Option<(f64, f64)> = None;
    let mut best_above: Option<f64> = None;
    let tol = 1e-12 * reference.abs().max(1.0);
    for base in bases.into_iter().flatten() {
        let n0 = ((reference - base) / TWO_PI).round();
        for dn in [-1.0, 0.0, 1.0] {
            let beta = base + (n0 + dn) * TWO_PI;
            let dist = (beta - reference).abs();
            if best.is_none_or(|(d, b)| dist < d || (dist == d && beta > b)) {
                best = Some((dist, beta));
            }
            if beta >= reference - tol && best_above.is_none_or(|b| beta < b) {
                best_above = Some(beta);
            }
        }
    }
    let beta = match (monotone, best_above) {
        (true, Some(b)) => b,
        _ => best.map(|(_, b)| b).unwrap_or(0.0),
    };
    BlochPoint {
        alpha: alpha.max(0.0),
        beta,
    }
}

/// Bloch phase and attenuation per period across a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionCurve {
    pub grid: FrequencyGrid,
    pub cells_per_period: usize,
    pub lossless: bool,
    pub bloch_phase_per_period: Vec<f64>,
    pub bloch_attenuation_per_period: Vec<f64>,
    pub in_stopband: Vec<bool>,
}

impl DispersionCurve {
    fn bracket(&self, f: f64) -> Option<(usize, f64)> {
        let g = &self.grid;
        if !(f >= g.start && f <= g.stop) {
            return None;
        }
        let pos = (f - g.start) / g.step();
        let i = (pos.floor() as usize).min(g.points - 2);
        Some((i, pos - i as f64))
    }

    /// Linearly interpolated phase per period.
    pub fn phase_at(&self, f: f64) -> Option<f64> {
        let (i, t) = self.bracket(f)?;
        let p = &self.bloch_phase_per_period;
        Some(p[i] + t * (p[i + 1] - p[i]))
    }

    pub fn attenuation_at(&self, f: f64) -> Option<f64> {
        let (i, t) = self.bracket(f)?;
        let a = &self.bloch_attenuation_per_period;
        Some(a[i] + t * (a[i + 1] - a[i]))
    }

    pub fn phase_per_cell(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.cells_per_period as f64;
        self.bloch_phase_per_period.iter().map(move |b| b / n)
    }
}

/// Bloch analysis of a period whose chain matrix is `supercell_at(f)`.
pub fn bloch_dispersion<F>(
    supercell_at: F,
    grid: &FrequencyGrid,
    cells_per_period: usize,
    lossless: bool,
) -> DispersionCurve
where
    F: Fn(f64) -> TwoPortMatrix + Sync,
{
    // walk up from DC so the first grid point lands on the right branch
    let lead_step = grid
        .step()
        .min(grid.start / 200.0)
        .max(grid.start / 20_000.0);
    let lead: Vec<f64> = (1..)
        .map(|k| k as f64 * lead_step)
        .take_while(|f| *f < grid.start)
        .collect();
    let half_traces = |fs: &[f64]| -> Vec<Complex64> {
        fs.par_iter()
            .map(|&f| supercell_at(f).half_trace())
            .collect()
    };
    let lead_x = half_traces(&lead);
    let freqs: Vec<f64> = grid.frequencies().collect();
    let xs = half_traces(&freqs);

    let mut reference = 0.0;
    for x in &lead_x {
        reference = select_branch(*x, reference, lossless, true).beta;
    }
    let mut phase = Vec::with_capacity(xs.len());
    let mut attenuation = Vec::with_capacity(xs.len());
    for x in &xs {
        let p = select_branch(*x, reference, lossless, lossless);
        reference = p.beta;
        phase.push(p.beta);
        attenuation.push(p.alpha);
    }

    let in_stopband = if lossless {
        xs.iter().map(|x| x.re.abs() > 1.0).collect()
    } else {
        let mut sorted = attenuation.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        attenuation.iter().map(|a| *a > 10.0 * median).collect()
    };

    DispersionCurve {
        grid: *grid,
        cells_per_period,
        lossless,
        bloch_phase_per_period: phase,
        bloch_attenuation_per_period: attenuation,
        in_stopband,
    }
}

/// Bloch analysis of one annotated period of `network`.
pub fn network_dispersion(
    network: &LadderNetwork,
    grid: &FrequencyGrid,
    opts: &LinearOptions,
) -> Result<DispersionCurve, LinearError> {
    grid.validate()?;
    let period = network.period_cells().ok_or(LinearError::MissingPeriod)?;
    let cell = network
        .slice_cells(0..period)
        .map_err(|_| LinearError::MissingPeriod)?;
    let runs = cell.cell_runs();
    Ok(bloch_dispersion(
        |f| runs_matrix(&runs, f, opts),
        grid,
        period,
        opts.is_lossless(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stopband {
    pub f_low: f64,
    pub f_high: f64,
    pub center: f64,
    pub max_attenuation_per_period: f64,
}

impl Stopband {
    pub fn width(&self) -> f64 {
        self.f_high - self.f_low
    }

    pub fn contains(&self, f: f64) -> bool {
        f >= self.f_low && f <= self.f_high
    }
}

/// Sorted, non-overlapping stopbands.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StopbandReport {
    pub bands: Vec<Stopband>,
}

impl StopbandReport {
    pub fn widest(&self) -> Option<&Stopband> {
        self.bands
            .iter()
            .max_by(|a, b| a.width().total_cmp(&b.width()))
    }

    pub fn first(&self) -> Option<&Stopband> {
        self.bands.first()
    }

    /// Band whose centre is nearest to `f`.
    pub fn nearest(&self, f: f64) -> Option<&Stopband> {
        self.bands
            .iter()
            .min_by(|a, b| (a.center - f).abs().total_cmp(&(b.center - f).abs()))
    }
}

/// Contiguous stopband runs deeper than `min_depth` nepers per period,
/// merging runs separated by a single passband point.
pub fn find_stopbands(curve: &DispersionCurve, min_depth: f64) -> StopbandReport {
    let flags = &curve.in_stopband;
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < flags.len() {
        if flags[i] {
            let start = i;
            while i + 1 < flags.len() && flags[i + 1] {
                i += 1;
            }
            match runs.last_mut() {
                Some((_, end)) if start == *end + 2 => *end = i,
                _ => runs.push((start, i)),
            }
        }
        i += 1;
    }
    let bands = runs
        .into_iter()
        .filter_map(|(lo, hi)| {
            let depth = curve.bloch_attenuation_per_period[lo..=hi]
                .iter()
                .copied()
                .fold(0.0, f64::max);
            let f_low = curve.grid.frequency(lo);
            let f_high = curve.grid.frequency(hi);
            (depth >= min_depth).then_some(Stopband {
                f_low,
                f_high,
                center: 0.5 * (f_low + f_high),
                max_attenuation_per_period: depth,
            })
        })
        .collect();
    StopbandReport { bands }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{cutoff_frequency, expand_fishbone, FishboneSpec};

    fn uniform(cells: usize) -> LadderNetwork {
        let spec = FishboneSpec {
            num_periods: 1,
            cells_per_period: cells,
            loaded_cells: 0,
            loaded_cells_every_third: 0,
            ..FishboneSpec::nominal()
        };
        expand_fishbone(&spec).unwrap()
    }

    #[test]
    fn branch_selection_at_band_edge_is_monotone() {
        // leaving a stopband at π: both π ± δ are equally close, take the upper
        let x = Complex64::new((PI + 0.01).cos(), 0.0);
        let p = select_branch(x, PI, true, true);
        assert!((p.beta - (PI + 0.01)).abs() < 1e-12);
        let p = select_branch(x, PI - 0.02, true, false);
        assert!((p.beta - (PI - 0.01)).abs() < 1e-12);
    }

    #[test]
    fn uniform_cell_low_frequency_limit() {
        let net = uniform(1);
        let fc = cutoff_frequency(&FishboneSpec::nominal().base_cell);
        let grid = FrequencyGrid::new(1e9, fc / 20.0, 200).unwrap();
        let curve = network_dispersion(&net, &grid, &LinearOptions::default()).unwrap();
        for (f, beta) in grid.frequencies().zip(&curve.bloch_phase_per_period) {
            let telegrapher = 2.0 * PI * f * (50e-12f64 * 20e-15).sqrt();
            assert!(((beta - telegrapher) / telegrapher).abs() < 0.01);
        }
        assert!(curve.in_stopband.iter().all(|s| !s));
    }

    #[test]
    fn uniform_cell_phase_reaches_pi_at_cutoff() {
        let net = uniform(1);
        let fc = cutoff_frequency(&FishboneSpec::nominal().base_cell);
        let grid = FrequencyGrid::new(fc * 0.5, fc, 101).unwrap();
        let curve = network_dispersion(&net, &grid, &LinearOptions::default()).unwrap();
        let last = *curve.bloch_phase_per_period.last().unwrap();
        assert!((last - PI).abs() < 1e-6, "{last}");
    }

    #[test]
    fn lossy_line_attenuates_everywhere() {
        let net = uniform(1);
        let grid = FrequencyGrid::new(1e9, 20e9, 50).unwrap();
        let opts = LinearOptions {
            bias_current: 0.0,
            loss_tangent: 1e-4,
        };
        let curve = network_dispersion(&net, &grid, &opts).unwrap();
        assert!(curve.bloch_attenuation_per_period.iter().all(|a| *a > 0.0));
        assert!(curve.in_stopband.iter().all(|s| !s));
        let lossless = network_dispersion(&net, &grid, &LinearOptions::default()).unwrap();
        for (a, b) in curve
            .bloch_phase_per_period
            .iter()
            .zip(&lossless.bloch_phase_per_period)
        {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn uniform_line_has_no_stopbands_below_cutoff() {
        let net = uniform(1);
        let grid = FrequencyGrid::new(0.1e9, 300e9, 3000).unwrap();
        let curve = network_dispersion(&net, &grid, &LinearOptions::default()).unwrap();
        assert!(find_stopbands(&curve, 0.0).bands.is_empty());
    }

    #[test]
    fn stopband_runs_merge_across_single_gaps() {
        let grid = FrequencyGrid::new(1.0, 10.0, 10).unwrap();
        let flags = [
            false, true, true, false, true, false, false, true, false, false,
        ];
        let curve = DispersionCurve {
            grid,
            cells_per_period: 1,
            lossless: true,
            bloch_phase_per_period: vec![0.0; 10],
            bloch_attenuation_per_period: flags
                .iter()
                .map(|f| if *f { 0.5 } else { 0.0 })
                .collect(),
            in_stopband: flags.to_vec(),
        };
        let report = find_stopbands(&curve, 0.1);
        assert_eq!(report.bands.len(), 2);
        assert_eq!((report.bands[0].f_low, report.bands[0].f_high), (2.0, 5.0));
        assert_eq!((report.bands[1].f_low, report.bands[1].f_high), (8.0, 8.0));
        assert!(find_stopbands(&curve, 1.0).bands.is_empty());
    }
}
