//! Plot-ready CSV tables and key-value reports.

use std::fmt::Write as _;

use super::format_sci;
use crate::analysis::{CalibrationResult, GainMetrics, SweepResult};
use crate::fwm::{GainProfile, HarmonicScan};
use crate::linear::{DispersionCurve, SParameterSet, StopbandReport};

fn num(x: f64, digits: usize) -> String {
    // adding zero folds -0 into +0
    format_sci(x + 0.0, digits)
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn row(s: &mut String, fields: &[String]) {
    s.push_str(&fields.join(","));
    s.push('\n');
}

pub fn gain_csv(profile: &GainProfile, digits: usize) -> String {
    let mut s = String::from("freq_hz,gain_db,delta_k_linear,delta_k_total,in_stopband\n");
    for p in &profile.points {
        row(
            &mut s,
            &[
                num(p.frequency, digits),
                num(p.gain_db, digits),
                num(p.delta_k_linear, digits),
                num(p.delta_k_total, digits),
                flag(p.in_stopband).into(),
            ],
        );
    }
    s
}

pub fn harmonic_csv(scan: &HarmonicScan, digits: usize) -> String {
    let mut s = String::from("z_cells,p_pump_w,p_signal_w,p_idler_w,p_third_w\n");
    for i in 0..scan.z_cells.len() {
        row(
            &mut s,
            &[
                scan.z_cells[i],
                scan.p_pump_w[i],
                scan.p_signal_w[i],
                scan.p_idler_w[i],
                scan.p_third_w[i],
            ]
            .map(|x| num(x, digits)),
        );
    }
    s
}

pub fn dispersion_csv(curve: &DispersionCurve, digits: usize) -> String {
    let mut s = String::from("freq_hz,bloch_phase,bloch_atten,phase_per_cell,in_stopband\n");
    let n = curve.cells_per_period as f64;
    for (i, f) in curve.grid.frequencies().enumerate() {
        let beta = curve.bloch_phase_per_period[i];
        row(
            &mut s,
            &[
                num(f, digits),
                num(beta, digits),
                num(curve.bloch_attenuation_per_period[i], digits),
                num(beta / n, digits),
                flag(curve.in_stopband[i]).into(),
            ],
        );
    }
    s
}

/// S-parameters alongside the Bloch data of the same grid.
pub fn linear_csv(set: &SParameterSet, curve: &DispersionCurve, digits: usize) -> String {
    let mut s =
        String::from("freq_hz,s11_re,s11_im,s21_re,s21_im,bloch_phase,bloch_atten,in_stopband\n");
    for (i, (f, p)) in set.frequencies().zip(&set.points).enumerate() {
        row(
            &mut s,
            &[
                num(f, digits),
                num(p.s11.re, digits),
                num(p.s11.im, digits),
                num(p.s21.re, digits),
                num(p.s21.im, digits),
                num(curve.bloch_phase_per_period[i], digits),
                num(curve.bloch_attenuation_per_period[i], digits),
                flag(curve.in_stopband[i]).into(),
            ],
        );
    }
    s
}

fn list(values: &[f64], digits: usize) -> String {
    values
        .iter()
        .map(|&v| num(v, digits))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn metrics_report(m: &GainMetrics, digits: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "peak_gain_db = {}", num(m.peak_gain_db, digits));
    let _ = writeln!(
        s,
        "peak_frequency_hz = {}",
        num(m.peak_frequency_hz, digits)
    );
    let _ = writeln!(
        s,
        "double_sided_bw_3db_hz = {}",
        num(m.double_sided_bw_3db_hz, digits)
    );
    let _ = writeln!(s, "ripple_db = {}", num(m.ripple_db, digits));
    let _ = writeln!(s, "dip_count = {}", m.dip_frequencies_hz.len());
    let _ = writeln!(
        s,
        "dip_frequencies_hz = {}",
        list(&m.dip_frequencies_hz, digits)
    );
    for w in &m.warnings {
        let _ = writeln!(s, "warning = {w}");
    }
    s
}

pub fn metrics_csv(m: &GainMetrics, digits: usize) -> String {
    let mut s =
        String::from("peak_gain_db,peak_frequency_hz,double_sided_bw_3db_hz,ripple_db,dip_count\n");
    row(
        &mut s,
        &[
            num(m.peak_gain_db, digits),
            num(m.peak_frequency_hz, digits),
            num(m.double_sided_bw_3db_hz, digits),
            num(m.ripple_db, digits),
            m.dip_frequencies_hz.len().to_string(),
        ],
    );
    s
}

pub fn stopband_report(report: &StopbandReport, digits: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "stopband_count = {}", report.bands.len());
    for (i, b) in report.bands.iter().enumerate() {
        let _ = writeln!(s, "stopband.{i}.f_low_hz = {}", num(b.f_low, digits));
        let _ = writeln!(s, "stopband.{i}.f_high_hz = {}", num(b.f_high, digits));
        let _ = writeln!(s, "stopband.{i}.center_hz = {}", num(b.center, digits));
        let _ = writeln!(s, "stopband.{i}.width_hz = {}", num(b.width(), digits));
        let _ = writeln!(
            s,
            "stopband.{i}.max_attenuation_np_per_period = {}",
            num(b.max_attenuation_per_period, digits)
        );
    }
    s
}

pub fn harmonic_report(scan: &HarmonicScan, digits: usize) -> String {
    let mut s = String::new();
    let last = scan.p_third_w.len().saturating_sub(1);
    let max = scan.p_third_w.iter().copied().fold(0.0, f64::max);
    let _ = writeln!(
        s,
        "conversion_efficiency = {}",
        num(scan.conversion_efficiency, digits)
    );
    let _ = writeln!(s, "delta_k3 = {}", num(scan.delta_k3, digits));
    let _ = writeln!(s, "third_in_stopband = {}", scan.third_in_stopband);
    let _ = writeln!(
        s,
        "p_third_output_w = {}",
        num(scan.p_third_w.get(last).copied().unwrap_or(0.0), digits)
    );
    let _ = writeln!(s, "p_third_max_w = {}", num(max, digits));
    s
}

pub fn calibration_report(c: &CalibrationResult, digits: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "i_star_a = {}", num(c.i_star, digits));
    let _ = writeln!(s, "achieved_peak_db = {}", num(c.achieved_peak_db, digits));
    let _ = writeln!(s, "target_peak_db = {}", num(c.target_peak_db, digits));
    let _ = writeln!(s, "residual_db = {}", num(c.residual_db, digits));
    let _ = writeln!(s, "iterations = {}", c.iterations);
    let _ = writeln!(s, "pump_frequency_hz = {}", num(c.pump.frequency, digits));
    let _ = writeln!(s, "pump_power_w = {}", num(c.pump.power, digits));
    s
}

/// One row per grid point; failed points keep their coordinates and carry
/// the error text.
pub fn sweep_csv(result: &SweepResult, digits: usize) -> String {
    let mut header: Vec<String> = result
        .axes
        .iter()
        .map(|a| a.parameter.name().to_string())
        .collect();
    header.extend(
        [
            "status",
            "peak_gain_db",
            "peak_frequency_hz",
            "double_sided_bw_3db_hz",
            "ripple_db",
            "dip_count",
            "message",
        ]
        .map(String::from),
    );
    let mut s = String::new();
    row(&mut s, &header);
    for p in &result.points {
        let mut fields: Vec<String> = p.coordinates.iter().map(|&c| num(c, digits)).collect();
        match &p.outcome {
            Ok(m) => {
                fields.push("ok".into());
                fields.extend(
                    [
                        m.peak_gain_db,
                        m.peak_frequency_hz,
                        m.double_sided_bw_3db_hz,
                        m.ripple_db,
                    ]
                    .map(|x| num(x, digits)),
                );
                fields.push(m.dip_frequencies_hz.len().to_string());
                fields.push(String::new());
            }
            Err(e) => {
                fields.push("error".into());
                fields.extend(std::iter::repeat_n(String::new(), 5));
                fields.push(format!("\"{}\"", e.replace('"', "'")));
            }
        }
        row(&mut s, &fields);
    }
    s
}
