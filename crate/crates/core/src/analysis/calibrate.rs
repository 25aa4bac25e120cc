use serde::{Deserialize, Serialize};

use super::metrics::{gain_metrics, MetricOptions};
use super::pipeline::Pipeline;
use super::AnalysisError;
use crate::fwm::{GainSolver, KerrCoefficient, Pump};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationSettings {
    pub target_peak_db: f64,
    pub tolerance_db: f64,
    /// Bracket on I*, amperes.
    pub i_star_min: f64,
    pub i_star_max: f64,
    pub max_iterations: usize,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        Self {
            target_peak_db: 15.0,
            tolerance_db: 0.1,
            i_star_min: 1e-3,
            i_star_max: 100e-3,
            max_iterations: 80,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub i_star: f64,
    /// Achieved minus target peak gain, dB.
    pub residual_db: f64,
    pub achieved_peak_db: f64,
    pub target_peak_db: f64,
    pub pump: Pump,
    pub iterations: usize,
}

/// Peak gain as a function of I* for one pipeline, reusing the linear setup
/// when the inductors are unbiased.
pub struct PeakGainFunction<'a> {
    pipeline: &'a Pipeline,
    medium: Box<dyn crate::fwm::Medium>,
    metrics: MetricOptions,
}

impl<'a> PeakGainFunction<'a> {
    pub fn new(pipeline: &'a Pipeline) -> Result<Self, AnalysisError> {
        Ok(Self {
            medium: pipeline.medium()?,
            pipeline,
            metrics: pipeline.metrics,
        })
    }

    fn solver(&self) -> Result<GainSolver<'_>, AnalysisError> {
        let p = self.pipeline;
        Ok(GainSolver::new(
            self.medium.as_ref(),
            p.pump,
            &p.signal_grid,
            p.gain,
        )?)
    }

    pub fn peak_db(&self, i_star: f64) -> Result<f64, AnalysisError> {
        self.evaluate(&self.solver()?, i_star)
    }

    fn evaluate(&self, solver: &GainSolver<'_>, i_star: f64) -> Result<f64, AnalysisError> {
        if self.pipeline.linear.bias_current != 0.0 {
            // the bias shifts the linear dispersion with I*, so rebuild everything
            let p = Pipeline {
                design: self.pipeline.design.with_i_star(i_star),
                ..self.pipeline.clone()
            };
            return Ok(p.run()?.1.peak_gain_db);
        }
        let kerr = KerrCoefficient::for_medium(
            self.medium.as_ref(),
            self.pipeline.pump.frequency,
            i_star,
        )?;
        let profile = solver.solve(&kerr)?;
        Ok(gain_metrics(&profile, &self.metrics)?.peak_gain_db)
    }
}

/// Bisection in log I* for the peak gain `settings.target_peak_db`.
pub fn calibrate_istar(
    pipeline: &Pipeline,
    settings: &CalibrationSettings,
) -> Result<CalibrationResult, AnalysisError> {
    let s = settings;
    if !(s.i_star_min > 0.0 && s.i_star_max > s.i_star_min) {
        return Err(AnalysisError::InvalidParameter {
            name: "calibration bracket",
            reason: format!(
                "need 0 < min < max, got [{}, {}]",
                s.i_star_min, s.i_star_max
            ),
        });
    }
    let f = PeakGainFunction::new(pipeline)?;
    let solver = f.solver()?;
    // peak gain falls as I* grows
    let high_gain = f.evaluate(&solver, s.i_star_min)?;
    let low_gain = f.evaluate(&solver, s.i_star_max)?;
    if !(s.target_peak_db <= high_gain && s.target_peak_db >= low_gain) {
        return Err(AnalysisError::BracketFailure {
            target: s.target_peak_db,
            low: low_gain,
            high: high_gain,
            bracket: (s.i_star_min, s.i_star_max),
        });
    }

    let (mut lo, mut hi) = (s.i_star_min.ln(), s.i_star_max.ln());
    let mut best = (f64::INFINITY, s.i_star_min, high_gain);
    for it in 1..=s.max_iterations {
        let mid = 0.5 * (lo + hi);
        let i_star = mid.exp();
        let peak = f.evaluate(&solver, i_star)?;
        let residual = peak - s.target_peak_db;
        if residual.abs() < best.0.abs() {
            best = (residual, i_star, peak);
        }
        if residual.abs() <= 0.1 * s.tolerance_db || (hi - lo) < 1e-12 {
            return Ok(CalibrationResult {
                i_star,
                residual_db: residual,
                achieved_peak_db: peak,
                target_peak_db: s.target_peak_db,
                pump: pipeline.pump,
                iterations: it,
            });
        }
        if residual > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best.0.abs() <= s.tolerance_db {
        return Ok(CalibrationResult {
            i_star: best.1,
            residual_db: best.0,
            achieved_peak_db: best.2,
            target_peak_db: s.target_peak_db,
            pump: pipeline.pump,
            iterations: s.max_iterations,
        });
    }
    Err(AnalysisError::NotConverged {
        best_i_star: best.1,
        residual_db: best.0,
    })
}
