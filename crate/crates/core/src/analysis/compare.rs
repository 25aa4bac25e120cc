use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::metrics::{gain_metrics, GainMetrics, MetricOptions};
use super::pipeline::Pipeline;
use super::AnalysisError;
use crate::fwm::{
    integrate_gain, DispersionlessMedium, GainOptions, KerrCoefficient, Medium, Pump,
};
use crate::linear::FrequencyGrid;

/// One design at its operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingSummary {
    pub name: String,
    pub metrics: GainMetrics,
    pub pump: Pump,
    pub i_star: f64,
    pub z0: f64,
    /// Line length in pump wavelengths.
    pub electrical_length_wavelengths: f64,
}

impl OperatingSummary {
    pub fn from_pipeline(
        name: &str,
        pipeline: &Pipeline,
        metrics: GainMetrics,
    ) -> Result<Self, AnalysisError> {
        let medium = pipeline.medium()?;
        Self::from_medium(
            name,
            medium.as_ref(),
            pipeline.pump,
            pipeline.i_star()?,
            metrics,
        )
    }

    pub fn from_medium(
        name: &str,
        medium: &dyn Medium,
        pump: Pump,
        i_star: f64,
        metrics: GainMetrics,
    ) -> Result<Self, AnalysisError> {
        let k = crate::fwm::effective_channel(medium, pump.frequency)?.wavenumber;
        Ok(Self {
            name: name.to_string(),
            metrics,
            pump,
            i_star,
            z0: medium.impedance(),
            electrical_length_wavelengths: k * medium.length_cells() / (2.0 * std::f64::consts::PI),
        })
    }

    /// I_rms^2 / I*^2 at the pump.
    pub fn nonlinearity_level(&self) -> f64 {
        self.pump.power / (self.z0 * self.i_star * self.i_star)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub quantity: String,
    pub a: f64,
    pub b: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub a: String,
    pub b: String,
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn row(&self, quantity: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<32} {:>20} {:>20} {:>20}",
            "quantity", self.a, self.b, "delta"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<32} {:>20.11e} {:>20.11e} {:>20.11e}",
                r.quantity, r.a, r.b, r.delta
            );
        }
        s
    }
}

pub fn compare_designs(a: &OperatingSummary, b: &OperatingSummary) -> Comparison {
    let pairs: [(&str, f64, f64); 9] = [
        (
            "peak_gain_db",
            a.metrics.peak_gain_db,
            b.metrics.peak_gain_db,
        ),
        (
            "peak_frequency_hz",
            a.metrics.peak_frequency_hz,
            b.metrics.peak_frequency_hz,
        ),
        (
            "double_sided_bw_3db_hz",
            a.metrics.double_sided_bw_3db_hz,
            b.metrics.double_sided_bw_3db_hz,
        ),
        ("ripple_db", a.metrics.ripple_db, b.metrics.ripple_db),
        ("pump_frequency_hz", a.pump.frequency, b.pump.frequency),
        ("pump_power_w", a.pump.power, b.pump.power),
        ("i_star_a", a.i_star, b.i_star),
        (
            "electrical_length_wavelengths",
            a.electrical_length_wavelengths,
            b.electrical_length_wavelengths,
        ),
        (
            "nonlinearity_level",
            a.nonlinearity_level(),
            b.nonlinearity_level(),
        ),
    ];
    Comparison {
        a: a.name.clone(),
        b: b.name.clone(),
        rows: pairs
            .iter()
            .map(|&(q, x, y)| ComparisonRow {
                quantity: q.to_string(),
                a: x,
                b: y,
                delta: y - x,
            })
            .collect(),
    }
}

/// Dispersionless line of impedance `z0` that is `pump_wavelengths` long at
/// `pump_frequency`, discretised into `cells` steps.
pub fn cpw_reference(
    z0: f64,
    pump_wavelengths: f64,
    pump_frequency: f64,
    cells: usize,
) -> DispersionlessMedium {
    DispersionlessMedium {
        delay_per_cell: pump_wavelengths / (pump_frequency * cells as f64),
        length: cells as f64,
        z0,
        max_frequency: f64::INFINITY,
    }
}

/// Pump power giving `target_peak_db` on `medium` at fixed I*, by bisection
/// in log power over `[p_min, p_max]`.
#[allow(clippy::too_many_arguments)]
pub fn matched_pump_power(
    medium: &dyn Medium,
    i_star: f64,
    pump_frequency: f64,
    grid: &FrequencyGrid,
    options: &GainOptions,
    metrics: &MetricOptions,
    target_peak_db: f64,
    (p_min, p_max): (f64, f64),
) -> Result<f64, AnalysisError> {
    let kerr = KerrCoefficient::for_medium(medium, pump_frequency, i_star)?;
    let peak = |p: f64| -> Result<f64, AnalysisError> {
        let prof = integrate_gain(
            medium,
            &kerr,
            Pump {
                frequency: pump_frequency,
                power: p,
            },
            grid,
            options,
        )?;
        Ok(gain_metrics(&prof, metrics)?.peak_gain_db)
    };
    let (g_lo, g_hi) = (peak(p_min)?, peak(p_max)?);
    if !(g_lo <= target_peak_db && target_peak_db <= g_hi) {
        return Err(AnalysisError::BracketFailure {
            target: target_peak_db,
            low: g_lo,
            high: g_hi,
            bracket: (p_min, p_max),
        });
    }
    let (mut lo, mut hi) = (p_min.ln(), p_max.ln());
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let g = peak(mid.exp())?;
        if (g - target_peak_db).abs() < 1e-3 {
            return Ok(mid.exp());
        }
        if g < target_peak_db {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}
