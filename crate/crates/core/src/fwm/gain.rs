use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cme::{coupled_mode_rhs, Amplitudes, CoupledModes, IDLER, PUMP, SIGNAL, THIRD};
use super::medium::{effective_channel, Channel, Medium};
use super::ode::{integrate, OdeError, StepStats, Tolerances};
use super::{FwmError, KerrCoefficient};
use crate::linear::FrequencyGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pump {
    pub frequency: f64,
    /// Watts at the device input.
    pub power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GainOptions {
    pub undepleted: bool,
    pub include_third_harmonic: bool,
    pub phase_modulation: bool,
    /// Signal seed relative to the pump, dB.
    pub seed_level_db: f64,
    pub tolerances: Tolerances,
}

impl Default for GainOptions {
    fn default() -> Self {
        Self {
            undepleted: false,
            include_third_harmonic: false,
            phase_modulation: true,
            seed_level_db: -60.0,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMismatch {
    pub delta_k_linear: f64,
    pub delta_k_total: f64,
    /// Some mode sits in a stopband.
    pub flagged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainPoint {
    pub frequency: f64,
    pub gain_db: f64,
    /// Idler output over signal input, photon-flux units.
    pub idler_conversion: f64,
    pub delta_k_linear: f64,
    pub delta_k_total: f64,
    pub in_stopband: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainProfile {
    pub grid: FrequencyGrid,
    pub pump: Pump,
    pub points: Vec<GainPoint>,
}

impl GainProfile {
    pub fn gain_db(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.gain_db).collect()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.frequency).collect()
    }

    pub fn in_stopband(&self) -> Vec<bool> {
        self.points.iter().map(|p| p.in_stopband).collect()
    }
}

/// Lumped per-mode factor applied to the envelopes at `position`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LumpedKick {
    pub position: f64,
    pub factor: Amplitudes,
}

/// Propagates `y0` over `[0, length]`, applying lumped kicks and recording
/// the state at each ascending `samples` position.
pub fn propagate(
    sys: &CoupledModes,
    length: f64,
    kicks: &[LumpedKick],
    y0: Amplitudes,
    tol: &Tolerances,
    samples: &[f64],
) -> Result<(Amplitudes, Vec<Amplitudes>, StepStats), OdeError> {
    enum Event {
        Kick(Amplitudes),
        Sample,
    }
    let mut events: Vec<(f64, Event)> = kicks
        .iter()
        .map(|k| (k.position, Event::Kick(k.factor)))
        .chain(samples.iter().map(|&z| (z, Event::Sample)))
        .filter(|(z, _)| (0.0..=length).contains(z))
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let rhs = |z: f64, a: &Amplitudes| coupled_mode_rhs(z, a, sys);
    let mut y = y0;
    let mut z = 0.0;
    let mut h = None;
    let mut stats = StepStats::default();
    let mut recorded = Vec::with_capacity(samples.len());
    for (pos, ev) in events {
        if pos > z {
            let (y1, h1, s) = integrate(rhs, z, pos, y, h, tol)?;
            y = y1;
            h = Some(h1);
            stats += s;
            z = pos;
        }
        match ev {
            Event::Kick(f) => {
                for (a, t) in y.iter_mut().zip(f) {
                    *a *= t;
                }
            }
            Event::Sample => recorded.push(y),
        }
    }
    if length > z {
        let (y1, _, s) = integrate(rhs, z, length, y, h, tol)?;
        y = y1;
        stats += s;
    }
    Ok((y, recorded, stats))
}

/// Closed-form undepleted signal power gain.
///
/// `G = 1 + (gP L)^2 (sinh(gL)/(gL))^2` with `g^2 = (gP)^2 - (dk/2)^2`; the
/// ratio turns into `sin` for `g^2 < 0` and into 1 at `g = 0`.
pub fn analytic_gain_undepleted(gamma_pp: f64, delta_k_total: f64, length: f64) -> f64 {
    let g2 = gamma_pp * gamma_pp - 0.25 * delta_k_total * delta_k_total;
    let x2 = g2 * length * length;
    let ratio = if x2.abs() < 1e-8 {
        1.0 + x2 / 6.0
    } else if x2 > 0.0 {
        let x = x2.sqrt();
        x.sinh() / x
    } else {
        let x = (-x2).sqrt();
        x.sin() / x
    };
    1.0 + (gamma_pp * length * ratio).powi(2)
}

fn mode_frequencies(pump: f64, signal: f64) -> Result<[f64; 4], FwmError> {
    let idler = 2.0 * pump - signal;
    if signal == pump {
        return Err(FwmError::InvalidFrequency {
            frequency: signal,
            reason: "signal coincides with the pump".into(),
        });
    }
    if !(idler > 0.0) {
        return Err(FwmError::InvalidFrequency {
            frequency: signal,
            reason: "idler frequency would be negative".into(),
        });
    }
    Ok([pump, signal, idler, 3.0 * pump])
}

/// Linear and pump-corrected mismatch for a signal tone.
pub fn phase_mismatch(
    medium: &dyn Medium,
    pump_frequency: f64,
    signal_frequency: f64,
    kerr: &KerrCoefficient,
    pump_power: f64,
) -> Result<PhaseMismatch, FwmError> {
    let [fp, fs, fi, _] = mode_frequencies(pump_frequency, signal_frequency).or_else(|e| {
        if signal_frequency == pump_frequency {
            Ok([pump_frequency; 4])
        } else {
            Err(e)
        }
    })?;
    let p = effective_channel(medium, fp)?;
    let s = effective_channel(medium, fs)?;
    let i = effective_channel(medium, fi)?;
    let dk = s.wavenumber + i.wavenumber - 2.0 * p.wavenumber;
    Ok(PhaseMismatch {
        delta_k_linear: dk,
        delta_k_total: dk + 2.0 * kerr.at(fp) * pump_power,
        flagged: p.in_stopband || s.in_stopband || i.in_stopband,
    })
}

/// Mismatch and damping of the third-harmonic channel. A harmonic driven
/// inside a stopband is evanescent both ways, so the gap depth adds to the
/// detuning instead of draining power.
pub(crate) fn third_harmonic_terms(pump: &Channel, third: &Channel) -> (f64, f64) {
    let dk3 = third.wavenumber - 3.0 * pump.wavenumber;
    if third.in_stopband {
        (dk3.signum() * dk3.hypot(third.attenuation), 0.0)
    } else {
        (dk3, third.attenuation)
    }
}

pub(crate) fn third_harmonic_attenuation(ch: &[Channel; 4]) -> [f64; 4] {
    let mut a = ch.map(|c| c.attenuation);
    a[THIRD] = third_harmonic_terms(&ch[PUMP], &ch[THIRD]).1;
    a
}

#[derive(Debug, Clone)]
struct PointSetup {
    freqs: [f64; 4],
    channels: [Channel; 4],
    kicks: Vec<LumpedKick>,
    delta_k_linear: f64,
}

/// Precomputes the linear data of a gain run so the Kerr strength can be
/// varied cheaply (calibration).
pub struct GainSolver<'m> {
    medium: &'m dyn Medium,
    grid: FrequencyGrid,
    pump: Pump,
    options: GainOptions,
    setups: Vec<PointSetup>,
}

impl<'m> GainSolver<'m> {
    pub fn new(
        medium: &'m dyn Medium,
        pump: Pump,
        grid: &FrequencyGrid,
        options: GainOptions,
    ) -> Result<Self, FwmError> {
        grid.validate()?;
        if !(pump.power.is_finite() && pump.power >= 0.0) {
            return Err(FwmError::InvalidParameter {
                name: "pump power",
                reason: format!("{} W", pump.power),
            });
        }
        if medium.channel(pump.frequency)?.in_stopband {
            return Err(FwmError::PumpInStopband {
                frequency: pump.frequency,
            });
        }
        let positions = medium.lumped_positions().to_vec();
        let setups = (0..grid.points)
            .into_par_iter()
            .map(|n| {
                let freqs = mode_frequencies(pump.frequency, grid.frequency(n))?;
                let used = if options.include_third_harmonic { 4 } else { 3 };
                let mut channels = [Channel {
                    wavenumber: 0.0,
                    attenuation: 0.0,
                    in_stopband: false,
                }; 4];
                let mut factors = vec![[Complex64::new(1.0, 0.0); 4]; positions.len()];
                for m in 0..used {
                    channels[m] = medium.channel(freqs[m])?;
                    for (j, t) in medium
                        .lumped_transmission(freqs[m])?
                        .into_iter()
                        .enumerate()
                    {
                        // chain-matrix delay exp(-j phi) is exp(+i phi) on the envelopes
                        factors[j][m] = t.conj();
                    }
                }
                let kicks = positions
                    .iter()
                    .zip(factors)
                    .map(|(&position, factor)| LumpedKick { position, factor })
                    .collect::<Vec<_>>();
                let excess =
                    |m: usize| -> f64 { kicks.iter().map(|k| k.factor[m].arg()).sum::<f64>() };
                let len = medium.length_cells();
                let k_eff = |m: usize| channels[m].wavenumber + excess(m) / len;
                let delta_k_linear = k_eff(SIGNAL) + k_eff(IDLER) - 2.0 * k_eff(PUMP);
                Ok(PointSetup {
                    freqs,
                    channels,
                    kicks,
                    delta_k_linear,
                })
            })
            .collect::<Result<Vec<_>, FwmError>>()?;
        Ok(Self {
            medium,
            grid: *grid,
            pump,
            options,
            setups,
        })
    }

    fn system(&self, s: &PointSetup, kerr: &KerrCoefficient) -> CoupledModes {
        let ch = &s.channels;
        CoupledModes {
            gamma: s.freqs.map(|f| kerr.at(f)),
            delta_k: ch[SIGNAL].wavenumber + ch[IDLER].wavenumber - 2.0 * ch[PUMP].wavenumber,
            delta_k3: third_harmonic_terms(&ch[PUMP], &ch[THIRD]).0,
            attenuation: third_harmonic_attenuation(ch),
            undepleted: self.options.undepleted,
            third_harmonic: self.options.include_third_harmonic,
            phase_modulation: self.options.phase_modulation,
        }
    }

    pub fn solve(&self, kerr: &KerrCoefficient) -> Result<GainProfile, FwmError> {
        let p = self.pump.power;
        let seed = (p.max(1e-30) * 10f64.powf(self.options.seed_level_db / 10.0)).sqrt();
        let len = self.medium.length_cells();
        let tol = &self.options.tolerances;
        let zero = Complex64::new(0.0, 0.0);

        let results: Vec<Result<GainPoint, (f64, OdeError)>> = self
            .setups
            .par_iter()
            .map(|s| {
                let sys = self.system(s, kerr);
                let fs = s.freqs[SIGNAL];
                let dk_total = s.delta_k_linear + 2.0 * kerr.at(self.pump.frequency) * p;
                let in_stopband = s.channels[SIGNAL].in_stopband || s.channels[IDLER].in_stopband;
                let (gain_db, idler_conversion) = if p == 0.0 {
                    // decoupled signal: only linear attenuation changes its magnitude
                    let lumped: f64 = s
                        .kicks
                        .iter()
                        .map(|k| 20.0 * k.factor[SIGNAL].norm().log10())
                        .sum();
                    (
                        -s.channels[SIGNAL].attenuation * len * 20.0 / std::f64::consts::LN_10
                            + lumped,
                        0.0,
                    )
                } else {
                    let y0 = [
                        Complex64::new(p.sqrt(), 0.0),
                        Complex64::new(seed, 0.0),
                        zero,
                        zero,
                    ];
                    let (out, _, _) =
                        propagate(&sys, len, &s.kicks, y0, tol, &[]).map_err(|e| (fs, e))?;
                    let conv = (out[IDLER].norm_sqr() / s.freqs[IDLER]) / (seed * seed / fs);
                    (20.0 * (out[SIGNAL].norm() / seed).log10(), conv)
                };
                Ok(GainPoint {
                    frequency: fs,
                    gain_db,
                    idler_conversion,
                    delta_k_linear: s.delta_k_linear,
                    delta_k_total: dk_total,
                    in_stopband,
                })
            })
            .collect();

        let failures: Vec<&(f64, OdeError)> =
            results.iter().filter_map(|r| r.as_ref().err()).collect();
        if let Some((frequency, err)) = failures.first() {
            return Err(FwmError::Integration {
                frequency: *frequency,
                failures: failures.len(),
                source: err.clone(),
            });
        }
        Ok(GainProfile {
            grid: self.grid,
            pump: self.pump,
            points: results
                .into_iter()
                .map(|r| r.expect("failures handled above"))
                .collect(),
        })
    }
}

/// Net signal gain `|a_s(L)/a_s(0)|` at each signal frequency.
pub fn integrate_gain(
    medium: &dyn Medium,
    kerr: &KerrCoefficient,
    pump: Pump,
    signal_grid: &FrequencyGrid,
    options: &GainOptions,
) -> Result<GainProfile, FwmError> {
    GainSolver::new(medium, pump, signal_grid, *options)?.solve(kerr)
}
