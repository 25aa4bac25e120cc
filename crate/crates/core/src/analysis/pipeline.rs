use serde::{Deserialize, Serialize};

use super::metrics::{gain_metrics, GainMetrics, MetricOptions};
use super::AnalysisError;
use crate::circuit::{
    expand_fishbone, expand_leaf, Element, FishboneSpec, LadderNetwork, LeafSpec,
};
use crate::fwm::{
    integrate_gain, medium_for_network, GainOptions, GainProfile, KerrCoefficient, Medium, Pump,
};
use crate::linear::{FrequencyGrid, LinearOptions};

/// A device: one of the parametrised designs or an explicit network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Design {
    Fishbone(FishboneSpec),
    Leaf(LeafSpec),
    Network(LadderNetwork),
}

impl Design {
    pub fn network(&self) -> Result<LadderNetwork, AnalysisError> {
        Ok(match self {
            Design::Fishbone(s) => expand_fishbone(s)?,
            Design::Leaf(s) => expand_leaf(s)?,
            Design::Network(n) => n.clone(),
        })
    }

    /// `n` devices in series with no discontinuity between them.
    pub fn cascaded(&self, n: usize) -> Result<Self, AnalysisError> {
        if n == 0 {
            return Err(AnalysisError::InvalidParameter {
                name: "cascade",
                reason: "must be at least 1".into(),
            });
        }
        Ok(match self {
            Design::Fishbone(s) => Design::Fishbone(FishboneSpec {
                num_periods: s.num_periods * n,
                ..*s
            }),
            Design::Leaf(s) => Design::Leaf(LeafSpec {
                num_blocks: s.num_blocks * n,
                ..*s
            }),
            Design::Network(net) => Design::Network(net.repeated(n)?),
        })
    }

    /// Nonlinearity scale of the first inductor.
    pub fn i_star(&self) -> Option<f64> {
        match self {
            Design::Fishbone(s) => Some(s.base_cell.inductor.i_star),
            Design::Leaf(s) => Some(s.base_cell.inductor.i_star),
            Design::Network(n) => n.elements().iter().find_map(|e| match e {
                Element::SeriesInductor { i_star, .. } => Some(*i_star),
                _ => None,
            }),
        }
    }

    pub fn with_i_star(&self, i_star: f64) -> Self {
        let mut d = self.clone();
        match &mut d {
            Design::Fishbone(s) => s.base_cell.inductor.i_star = i_star,
            Design::Leaf(s) => s.base_cell.inductor.i_star = i_star,
            Design::Network(n) => {
                let elements = n
                    .elements()
                    .iter()
                    .map(|e| match *e {
                        Element::SeriesInductor { l0, .. } => {
                            Element::SeriesInductor { l0, i_star }
                        }
                        other => other,
                    })
                    .collect();
                *n = LadderNetwork::new(elements, n.period_cells()).expect("same structure");
            }
        }
        d
    }
}

/// Everything needed to go from a design to a gain profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub design: Design,
    pub linear: LinearOptions,
    pub pump: Pump,
    pub signal_grid: FrequencyGrid,
    pub gain: GainOptions,
    pub metrics: MetricOptions,
}

impl Pipeline {
    /// Highest frequency the propagation model has to cover.
    pub fn max_frequency(&self) -> f64 {
        let idler_max = 2.0 * self.pump.frequency - self.signal_grid.start;
        let mut f = self.signal_grid.stop.max(idler_max);
        if self.gain.include_third_harmonic {
            f = f.max(3.0 * self.pump.frequency);
        }
        f * 1.02
    }

    pub fn medium(&self) -> Result<Box<dyn Medium>, AnalysisError> {
        let network = self.design.network()?;
        Ok(medium_for_network(
            &network,
            self.linear,
            self.max_frequency(),
        )?)
    }

    pub fn i_star(&self) -> Result<f64, AnalysisError> {
        self.design
            .i_star()
            .ok_or_else(|| AnalysisError::InvalidParameter {
                name: "design",
                reason: "network has no series inductor".into(),
            })
    }

    pub fn kerr(&self, medium: &dyn Medium) -> Result<KerrCoefficient, AnalysisError> {
        Ok(KerrCoefficient::for_medium(
            medium,
            self.pump.frequency,
            self.i_star()?,
        )?)
    }

    pub fn gain_profile(&self) -> Result<GainProfile, AnalysisError> {
        let medium = self.medium()?;
        let kerr = self.kerr(medium.as_ref())?;
        Ok(integrate_gain(
            medium.as_ref(),
            &kerr,
            self.pump,
            &self.signal_grid,
            &self.gain,
        )?)
    }

    pub fn run(&self) -> Result<(GainProfile, GainMetrics), AnalysisError> {
        let profile = self.gain_profile()?;
        let metrics = gain_metrics(&profile, &self.metrics)?;
        Ok((profile, metrics))
    }
}
