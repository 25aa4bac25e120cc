use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::cme::{CoupledModes, IDLER, PUMP, SIGNAL, THIRD};
use super::gain::{propagate, third_harmonic_attenuation, third_harmonic_terms, LumpedKick, Pump};
use super::medium::{Channel, Medium};
use super::ode::Tolerances;
use super::{FwmError, KerrCoefficient};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HarmonicOptions {
    /// Optional seeded signal tone propagated alongside.
    pub signal_frequency: Option<f64>,
    pub seed_level_db: f64,
    /// Number of equally spaced output positions, ends included.
    pub samples: usize,
    pub undepleted: bool,
    pub tolerances: Tolerances,
}

impl Default for HarmonicOptions {
    fn default() -> Self {
        Self {
            signal_frequency: None,
            seed_level_db: -60.0,
            samples: 501,
            undepleted: false,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicScan {
    pub z_cells: Vec<f64>,
    pub p_pump_w: Vec<f64>,
    pub p_signal_w: Vec<f64>,
    pub p_idler_w: Vec<f64>,
    pub p_third_w: Vec<f64>,
    /// |a_3(L)|^2 / P_p(0).
    pub conversion_efficiency: f64,
    pub delta_k3: f64,
    pub third_in_stopband: bool,
}

/// Pump (and optional signal) propagation with the third-harmonic channel on.
pub fn third_harmonic_scan(
    medium: &dyn Medium,
    kerr: &KerrCoefficient,
    pump: Pump,
    options: &HarmonicOptions,
) -> Result<HarmonicScan, FwmError> {
    if options.samples < 2 {
        return Err(FwmError::InvalidParameter {
            name: "samples",
            reason: "need at least 2".into(),
        });
    }
    let fp = pump.frequency;
    let pump_ch = medium.channel(fp)?;
    if pump_ch.in_stopband {
        return Err(FwmError::PumpInStopband { frequency: fp });
    }
    let (fs, fi) = match options.signal_frequency {
        Some(fs) => (fs, 2.0 * fp - fs),
        None => (fp, fp),
    };
    let freqs = [fp, fs, fi, 3.0 * fp];
    let channels: Vec<Channel> = freqs
        .iter()
        .map(|&f| medium.channel(f))
        .collect::<Result<_, _>>()?;

    let positions = medium.lumped_positions();
    let mut factors = vec![[Complex64::new(1.0, 0.0); 4]; positions.len()];
    for (m, &f) in freqs.iter().enumerate() {
        for (j, t) in medium.lumped_transmission(f)?.into_iter().enumerate() {
            factors[j][m] = t.conj();
        }
    }
    let kicks: Vec<LumpedKick> = positions
        .iter()
        .zip(factors)
        .map(|(&position, factor)| LumpedKick { position, factor })
        .collect();

    let sys = CoupledModes {
        gamma: freqs.map(|f| kerr.at(f)),
        delta_k: channels[SIGNAL].wavenumber + channels[IDLER].wavenumber
            - 2.0 * channels[PUMP].wavenumber,
        delta_k3: third_harmonic_terms(&channels[PUMP], &channels[THIRD]).0,
        attenuation: third_harmonic_attenuation(&[
            channels[PUMP],
            channels[SIGNAL],
            channels[IDLER],
            channels[THIRD],
        ]),
        undepleted: options.undepleted,
        third_harmonic: true,
        phase_modulation: true,
    };
    let seed = if options.signal_frequency.is_some() {
        (pump.power * 10f64.powf(options.seed_level_db / 10.0)).sqrt()
    } else {
        0.0
    };
    let zero = Complex64::new(0.0, 0.0);
    let y0 = [
        Complex64::new(pump.power.sqrt(), 0.0),
        Complex64::new(seed, 0.0),
        zero,
        zero,
    ];
    let len = medium.length_cells();
    let n = options.samples;
    let z_cells: Vec<f64> = (0..n)
        .map(|i| {
            if i + 1 == n {
                len
            } else {
                len * i as f64 / (n - 1) as f64
            }
        })
        .collect();
    let (_, states, _) =
        propagate(&sys, len, &kicks, y0, &options.tolerances, &z_cells).map_err(|e| {
            FwmError::Integration {
                frequency: fp,
                failures: 1,
                source: e,
            }
        })?;

    let col = |m: usize| -> Vec<f64> { states.iter().map(|s| s[m].norm_sqr()).collect() };
    let p_third_w = col(THIRD);
    let conversion_efficiency = if pump.power > 0.0 {
        p_third_w[n - 1] / pump.power
    } else {
        0.0
    };
    Ok(HarmonicScan {
        p_pump_w: col(PUMP),
        p_signal_w: col(SIGNAL),
        p_idler_w: col(IDLER),
        p_third_w,
        z_cells,
        conversion_efficiency,
        delta_k3: channels[THIRD].wavenumber - 3.0 * channels[PUMP].wavenumber,
        third_in_stopband: channels[THIRD].in_stopband,
    })
}
