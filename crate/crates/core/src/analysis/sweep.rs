use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::GainMetrics;
use super::pipeline::{Design, Pipeline};
use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    PumpFrequency,
    PumpPower,
    IStar,
    /// Fishbone only.
    CapacitanceReductionFactor,
    /// Leaf only.
    ResonantFrequency,
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::PumpFrequency => "pump_frequency_hz",
            SweepParameter::PumpPower => "pump_power_w",
            SweepParameter::IStar => "i_star_a",
            SweepParameter::CapacitanceReductionFactor => "capacitance_reduction_factor",
            SweepParameter::ResonantFrequency => "resonant_frequency_hz",
        }
    }

    /// Applies one axis value to a pipeline.
    pub fn apply(&self, p: &mut Pipeline, value: f64) -> Result<(), AnalysisError> {
        match self {
            SweepParameter::PumpFrequency => p.pump.frequency = value,
            SweepParameter::PumpPower => p.pump.power = value,
            SweepParameter::IStar => p.design = p.design.with_i_star(value),
            SweepParameter::CapacitanceReductionFactor => match &mut p.design {
                Design::Fishbone(s) => s.capacitance_reduction_factor = value,
                _ => return Err(self.mismatch()),
            },
            SweepParameter::ResonantFrequency => match &mut p.design {
                Design::Leaf(s) => s.resonator.resonant_frequency = value,
                _ => return Err(self.mismatch()),
            },
        }
        Ok(())
    }

    fn mismatch(&self) -> AnalysisError {
        AnalysisError::InvalidParameter {
            name: "sweep axis",
            reason: format!("{} does not apply to this design", self.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn linspace(parameter: SweepParameter, start: f64, stop: f64, points: usize) -> Self {
        let values = match points {
            0 => Vec::new(),
            1 => vec![start],
            n => (0..n)
                .map(|i| {
                    if i + 1 == n {
                        stop
                    } else {
                        start + (stop - start) * i as f64 / (n - 1) as f64
                    }
                })
                .collect(),
        };
        Self { parameter, values }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub coordinates: Vec<f64>,
    pub outcome: Result<GainMetrics, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axes: Vec<SweepAxis>,
    /// Row-major over the axes, last axis fastest.
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.outcome.is_err()).count()
    }
}

fn validate(axes: &[SweepAxis]) -> Result<usize, AnalysisError> {
    if axes.is_empty() {
        return Err(AnalysisError::InvalidParameter {
            name: "sweep",
            reason: "no axes".into(),
        });
    }
    let mut total = 1usize;
    for a in axes {
        if a.values.is_empty() {
            return Err(AnalysisError::InvalidParameter {
                name: "sweep axis",
                reason: format!("{} has no values", a.parameter.name()),
            });
        }
        if a.values.iter().any(|v| !v.is_finite()) {
            return Err(AnalysisError::InvalidParameter {
                name: "sweep axis",
                reason: format!("{} has a non-finite value", a.parameter.name()),
            });
        }
        total *= a.values.len();
    }
    Ok(total)
}

fn coordinates(axes: &[SweepAxis], mut flat: usize) -> Vec<f64> {
    let mut c = vec![0.0; axes.len()];
    for (k, a) in axes.iter().enumerate().rev() {
        c[k] = a.values[flat % a.values.len()];
        flat /= a.values.len();
    }
    c
}

/// Evaluates `evaluate` on the full grid of `axes`; failing points are
/// recorded and the sweep continues.
pub fn sweep_with<F>(axes: &[SweepAxis], evaluate: F) -> Result<SweepResult, AnalysisError>
where
    F: Fn(&[f64]) -> Result<GainMetrics, AnalysisError> + Sync,
{
    let total = validate(axes)?;
    let points = (0..total)
        .into_par_iter()
        .map(|i| {
            let coordinates = coordinates(axes, i);
            let outcome = evaluate(&coordinates).map_err(|e| e.to_string());
            SweepPoint {
                coordinates,
                outcome,
            }
        })
        .collect();
    Ok(SweepResult {
        axes: axes.to_vec(),
        points,
    })
}

/// Sweeps pipeline parameters.
pub fn sweep(pipeline: &Pipeline, axes: &[SweepAxis]) -> Result<SweepResult, AnalysisError> {
    sweep_with(axes, |coords| {
        let mut p = pipeline.clone();
        for (axis, &v) in axes.iter().zip(coords) {
            axis.parameter.apply(&mut p, v)?;
        }
        Ok(p.run()?.1)
    })
}
