//! Device geometry as data.
//!
//! A device is an artificial transmission line: a ladder of unit cells, each a
//! series kinetic inductor followed by a group of shunt elements (the cell
//! capacitor and, for resonator-loaded lines, embedded resonators). The two
//! phase-matching architectures are described by [`FishboneSpec`] (periodic
//! impedance loading) and [`LeafSpec`] (resonator phase shifters) and expanded
//! into explicit [`LadderNetwork`]s.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Impedance seen by an embedded shunt resonator: the 50 Ω line in both
/// directions.
pub const RESONATOR_ENVIRONMENT_OHMS: f64 = 25.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("malformed network: {0}")]
    MalformedNetwork(String),
}

fn require(cond: bool, name: &'static str, reason: impl Into<String>) -> Result<(), CircuitError> {
    if cond {
        Ok(())
    } else {
        Err(CircuitError::InvalidParameter {
            name,
            reason: reason.into(),
        })
    }
}

fn positive(value: f64, name: &'static str) -> Result<(), CircuitError> {
    require(
        value.is_finite() && value > 0.0,
        name,
        format!("must be positive and finite, got {value}"),
    )
}

/// Current-dependent kinetic inductance `L(I) = L0 (1 + I²/I*²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearInductorSpec {
    pub l0: f64,
    pub i_star: f64,
}

impl NonlinearInductorSpec {
    pub fn new(l0: f64, i_star: f64) -> Result<Self, CircuitError> {
        let spec = Self { l0, i_star };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        positive(self.l0, "l0")?;
        positive(self.i_star, "i_star")
    }

    pub fn inductance_at(&self, current: f64) -> f64 {
        self.l0 * (1.0 + (current / self.i_star).powi(2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitCellSpec {
    pub inductor: NonlinearInductorSpec,
    pub shunt_capacitance: f64,
}

impl UnitCellSpec {
    pub fn new(l0: f64, i_star: f64, shunt_capacitance: f64) -> Result<Self, CircuitError> {
        let cell = Self {
            inductor: NonlinearInductorSpec::new(l0, i_star)?,
            shunt_capacitance,
        };
        cell.validate()?;
        Ok(cell)
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        self.inductor.validate()?;
        positive(self.shunt_capacitance, "shunt_capacitance")
    }
}

/// `Z0 = sqrt(L/C)` of a lumped-element line.
pub fn characteristic_impedance(cell: &UnitCellSpec) -> f64 {
    (cell.inductor.l0 / cell.shunt_capacitance).sqrt()
}

/// Low-pass cutoff `f_c = 1/(π sqrt(LC))`.
pub fn cutoff_frequency(cell: &UnitCellSpec) -> f64 {
    1.0 / (PI * (cell.inductor.l0 * cell.shunt_capacitance).sqrt())
}

/// Pump power carried by an rms current on a line of impedance `z0`.
pub fn pump_power(i_rms: f64, z0: f64) -> f64 {
    i_rms * i_rms * z0
}

/// Inverse of [`pump_power`].
pub fn pump_current(power: f64, z0: f64) -> f64 {
    (power / z0).sqrt()
}

/// Periodically loaded ("fishbone") line.
///
/// A supercell is exactly `cells_per_period` cells; its final `loaded_cells`
/// cells have the shunt capacitance divided by `capacitance_reduction_factor`.
/// Every third supercell ends with `loaded_cells_every_third` loaded cells
/// instead, so the full repeat is three supercells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FishboneSpec {
    pub base_cell: UnitCellSpec,
    pub cells_per_period: usize,
    pub loaded_cells: usize,
    pub loaded_cells_every_third: usize,
    pub capacitance_reduction_factor: f64,
    pub num_periods: usize,
    pub physical_cell_length: f64,
}

impl FishboneSpec {
    /// 50 pH / 20 fF cells, 22-cell supercells with 2 (every third: 4) cells
    /// loaded at C/5, ten centimetres of line.
    pub fn nominal() -> Self {
        Self {
            base_cell: UnitCellSpec {
                inductor: NonlinearInductorSpec {
                    l0: 50e-12,
                    i_star: 15e-3,
                },
                shunt_capacitance: 20e-15,
            },
            cells_per_period: 22,
            loaded_cells: 2,
            loaded_cells_every_third: 4,
            capacitance_reduction_factor: 5.0,
            num_periods: 568,
            physical_cell_length: 8e-6,
        }
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        self.base_cell.validate()?;
        require(
            self.num_periods >= 1,
            "num_periods",
            "at least one supercell is required",
        )?;
        require(
            self.capacitance_reduction_factor.is_finite()
                && self.capacitance_reduction_factor > 1.0,
            "capacitance_reduction_factor",
            format!("must exceed 1, got {}", self.capacitance_reduction_factor),
        )?;
        require(
            self.loaded_cells < self.cells_per_period,
            "loaded_cells",
            format!(
                "{} loaded cells do not fit a {}-cell supercell",
                self.loaded_cells, self.cells_per_period
            ),
        )?;
        require(
            self.loaded_cells_every_third <= self.cells_per_period,
            "loaded_cells_every_third",
            format!(
                "{} loaded cells do not fit a {}-cell supercell",
                self.loaded_cells_every_third, self.cells_per_period
            ),
        )?;
        require(
            self.physical_cell_length >= 0.0,
            "physical_cell_length",
            "must not be negative",
        )
    }

    pub fn loaded_capacitance(&self) -> f64 {
        self.base_cell.shunt_capacitance / self.capacitance_reduction_factor
    }

    pub fn loaded_cell(&self) -> UnitCellSpec {
        UnitCellSpec {
            shunt_capacitance: self.loaded_capacitance(),
            ..self.base_cell
        }
    }

    /// Cells in the repeating three-supercell pattern.
    pub fn pattern_cells(&self) -> usize {
        3 * self.cells_per_period
    }

    pub fn total_cells(&self) -> usize {
        self.num_periods * self.cells_per_period
    }

    pub fn physical_length(&self) -> f64 {
        self.total_cells() as f64 * self.physical_cell_length
    }

    fn loaded_in_supercell(&self, index: usize) -> usize {
        if index % 3 == 2 {
            self.loaded_cells_every_third
        } else {
            self.loaded_cells
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonatorSpec {
    pub resonant_frequency: f64,
    pub loaded_q: f64,
    pub pairs_per_block: usize,
    pub pair_separation_cells: usize,
}

impl ResonatorSpec {
    pub fn validate(&self) -> Result<(), CircuitError> {
        positive(self.resonant_frequency, "resonant_frequency")?;
        positive(self.loaded_q, "loaded_q")
    }
}

/// Resonator-loaded ("leaf") line: every `cells_per_block_period` cells a
/// phase-shifter block of resonator pairs spaced `pair_separation_cells` apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeafSpec {
    pub base_cell: UnitCellSpec,
    pub cells_per_block_period: usize,
    pub resonator: ResonatorSpec,
    pub num_blocks: usize,
}

impl LeafSpec {
    /// 290 pH / 116 fF cells, 340-cell block period, two pairs of 6 GHz,
    /// Q = 70 resonators six cells apart, six blocks.
    pub fn nominal() -> Self {
        Self {
            base_cell: UnitCellSpec {
                inductor: NonlinearInductorSpec {
                    l0: 290e-12,
                    i_star: 15e-3,
                },
                shunt_capacitance: 116e-15,
            },
            cells_per_block_period: 340,
            resonator: ResonatorSpec {
                resonant_frequency: 6e9,
                loaded_q: 70.0,
                pairs_per_block: 2,
                pair_separation_cells: 6,
            },
            num_blocks: 6,
        }
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        self.base_cell.validate()?;
        self.resonator.validate()?;
        require(
            self.num_blocks >= 1,
            "num_blocks",
            "at least one block is required",
        )?;
        require(
            self.cells_per_block_period > self.resonator.pair_separation_cells,
            "pair_separation_cells",
            format!(
                "separation of {} cells does not fit a {}-cell block period",
                self.resonator.pair_separation_cells, self.cells_per_block_period
            ),
        )?;
        let span =
            self.resonator.pairs_per_block.saturating_sub(1) * self.resonator.pair_separation_cells;
        require(
            span < self.cells_per_block_period,
            "pairs_per_block",
            format!(
                "{} pairs span {span} cells, more than the block period",
                self.resonator.pairs_per_block
            ),
        )
    }

    pub fn total_cells(&self) -> usize {
        self.num_blocks * self.cells_per_block_period
    }

    /// Cell indices, within one block period, whose shunt node carries a
    /// resonator pair. The block is centred in the period.
    pub fn resonator_cells(&self) -> Vec<usize> {
        let pairs = self.resonator.pairs_per_block;
        if pairs == 0 {
            return Vec::new();
        }
        let span = (pairs - 1) * self.resonator.pair_separation_cells;
        let first = (self.cells_per_block_period - span - 1) / 2;
        (0..pairs)
            .map(|k| first + k * self.resonator.pair_separation_cells)
            .collect()
    }

    /// A single block period, as used for per-block phase-shift analysis.
    pub fn block(&self) -> Result<LadderNetwork, CircuitError> {
        expand_leaf(&LeafSpec {
            num_blocks: 1,
            ..*self
        })
    }
}

/// One element of a ladder. Series inductors separate shunt groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Element {
    SeriesInductor {
        l0: f64,
        i_star: f64,
    },
    ShuntCapacitor {
        c: f64,
    },
    /// `multiplicity` identical resonators in parallel at one node.
    ShuntResonator {
        resonant_frequency: f64,
        q: f64,
        multiplicity: u32,
    },
}

impl Element {
    pub fn is_shunt(&self) -> bool {
        !matches!(self, Element::SeriesInductor { .. })
    }
}

/// Series-LC realization of a shunt resonator: resonance at `f_r`, loaded Q
/// against [`RESONATOR_ENVIRONMENT_OHMS`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonatorRealization {
    pub inductance: f64,
    pub capacitance: f64,
}

impl ResonatorRealization {
    pub fn new(resonant_frequency: f64, q: f64) -> Self {
        let omega = 2.0 * PI * resonant_frequency;
        Self {
            inductance: q * RESONATOR_ENVIRONMENT_OHMS / omega,
            capacitance: 1.0 / (omega * q * RESONATOR_ENVIRONMENT_OHMS),
        }
    }

    pub fn resonant_frequency(&self) -> f64 {
        1.0 / (2.0 * PI * (self.inductance * self.capacitance).sqrt())
    }

    pub fn loaded_q(&self) -> f64 {
        (self.inductance / self.capacitance).sqrt() / RESONATOR_ENVIRONMENT_OHMS
    }
}

/// A full device: an ordered chain of elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderNetwork {
    elements: Vec<Element>,
    total_cells: usize,
    period_cells: Option<usize>,
}

/// A series inductor and the shunt group that follows it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell<'a> {
    pub l0: f64,
    pub i_star: f64,
    pub shunts: &'a [Element],
}

impl Cell<'_> {
    pub fn has_resonator(&self) -> bool {
        self.shunts
            .iter()
            .any(|e| matches!(e, Element::ShuntResonator { .. }))
    }

    pub fn capacitance(&self) -> f64 {
        self.shunts
            .iter()
            .map(|e| match e {
                Element::ShuntCapacitor { c } => *c,
                _ => 0.0,
            })
            .sum()
    }
}

impl LadderNetwork {
    /// Validates the alternation constraint: every series inductor is followed
    /// by a non-empty group of shunt elements, and the chain starts with an
    /// inductor.
    pub fn new(elements: Vec<Element>, period_cells: Option<usize>) -> Result<Self, CircuitError> {
        if elements.is_empty() {
            return Err(CircuitError::MalformedNetwork("no elements".into()));
        }
        if elements[0].is_shunt() {
            return Err(CircuitError::MalformedNetwork(
                "chain must begin with a series inductor".into(),
            ));
        }
        let mut total_cells = 0;
        for (i, e) in elements.iter().enumerate() {
            match *e {
                Element::SeriesInductor { l0, i_star } => {
                    positive(l0, "l0")?;
                    positive(i_star, "i_star")?;
                    if !elements.get(i + 1).is_some_and(Element::is_shunt) {
                        return Err(CircuitError::MalformedNetwork(format!(
                            "series inductor at element {i} is not followed by a shunt group"
                        )));
                    }
                    total_cells += 1;
                }
                Element::ShuntCapacitor { c } => positive(c, "c")?,
                Element::ShuntResonator {
                    resonant_frequency,
                    q,
                    multiplicity,
                } => {
                    positive(resonant_frequency, "resonant_frequency")?;
                    positive(q, "q")?;
                    require(multiplicity >= 1, "multiplicity", "must be at least 1")?;
                }
            }
        }
        if let Some(p) = period_cells {
            require(
                p >= 1 && p <= total_cells,
                "period_cells",
                format!("{p} outside 1..={total_cells}"),
            )?;
        }
        Ok(Self {
            elements,
            total_cells,
            period_cells,
        })
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn total_cells(&self) -> usize {
        self.total_cells
    }

    /// Cells in one repeat of the structure, when known.
    pub fn period_cells(&self) -> Option<usize> {
        self.period_cells
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell<'_>> + '_ {
        let mut i = 0;
        std::iter::from_fn(move || {
            let Element::SeriesInductor { l0, i_star } = *self.elements.get(i)? else {
                unreachable!("alternation checked at construction")
            };
            let start = i + 1;
            let mut end = start;
            while self.elements.get(end).is_some_and(Element::is_shunt) {
                end += 1;
            }
            i = end;
            Some(Cell {
                l0,
                i_star,
                shunts: &self.elements[start..end],
            })
        })
    }

    /// Consecutive identical cells collapsed into `(cell, repeat)` runs.
    pub fn cell_runs(&self) -> Vec<(Cell<'_>, usize)> {
        let mut runs: Vec<(Cell<'_>, usize)> = Vec::new();
        for cell in self.cells() {
            match runs.last_mut() {
                Some((last, n)) if *last == cell => *n += 1,
                _ => runs.push((cell, 1)),
            }
        }
        runs
    }

    /// Counts each distinct inductance once, so a line of identical cells
    /// gives exactly `total_cells * l0`.
    pub fn total_series_inductance(&self) -> f64 {
        let mut groups: Vec<(f64, usize)> = Vec::new();
        for c in self.cells() {
            match groups.iter_mut().find(|(l, _)| *l == c.l0) {
                Some((_, n)) => *n += 1,
                None => groups.push((c.l0, 1)),
            }
        }
        groups.iter().map(|&(l, n)| n as f64 * l).sum()
    }

    pub fn total_shunt_capacitance(&self) -> f64 {
        self.cells().map(|c| c.capacitance()).sum()
    }

    /// Cell indices whose shunt node carries a resonator.
    pub fn resonator_cells(&self) -> Vec<usize> {
        self.cells()
            .enumerate()
            .filter(|(_, c)| c.has_resonator())
            .map(|(i, _)| i)
            .collect()
    }

    /// Cells `range.start..range.end`, keeping the period annotation only if it
    /// still divides the result.
    pub fn slice_cells(&self, range: std::ops::Range<usize>) -> Result<Self, CircuitError> {
        let elements: Vec<Element> = self
            .cells()
            .skip(range.start)
            .take(range.end.saturating_sub(range.start))
            .flat_map(|c| {
                std::iter::once(Element::SeriesInductor {
                    l0: c.l0,
                    i_star: c.i_star,
                })
                .chain(c.shunts.iter().copied())
            })
            .collect();
        let n = range.end.saturating_sub(range.start);
        let period = self.period_cells.filter(|p| n.is_multiple_of(*p));
        Self::new(elements, period)
    }

    /// The same chain with every resonator removed.
    pub fn without_resonators(&self) -> Self {
        let elements = self
            .elements
            .iter()
            .copied()
            .filter(|e| !matches!(e, Element::ShuntResonator { .. }))
            .collect();
        Self {
            elements,
            total_cells: self.total_cells,
            period_cells: self.period_cells,
        }
    }

    /// Network made of `n` copies of this one.
    pub fn repeated(&self, n: usize) -> Result<Self, CircuitError> {
        require(n >= 1, "repeat", "at least one copy is required")?;
        let mut elements = Vec::with_capacity(self.elements.len() * n);
        for _ in 0..n {
            elements.extend_from_slice(&self.elements);
        }
        Ok(Self {
            elements,
            total_cells: self.total_cells * n,
            period_cells: self.period_cells,
        })
    }
}

fn push_cell(elements: &mut Vec<Element>, inductor: &NonlinearInductorSpec, c: f64) {
    elements.push(Element::SeriesInductor {
        l0: inductor.l0,
        i_star: inductor.i_star,
    });
    elements.push(Element::ShuntCapacitor { c });
}

pub fn expand_fishbone(spec: &FishboneSpec) -> Result<LadderNetwork, CircuitError> {
    spec.validate()?;
    let base = spec.base_cell.shunt_capacitance;
    let loaded = spec.loaded_capacitance();
    let inductor = &spec.base_cell.inductor;
    let mut elements = Vec::with_capacity(2 * spec.total_cells());
    for supercell in 0..spec.num_periods {
        let n_loaded = spec.loaded_in_supercell(supercell);
        for i in 0..spec.cells_per_period {
            let c = if i >= spec.cells_per_period - n_loaded {
                loaded
            } else {
                base
            };
            push_cell(&mut elements, inductor, c);
        }
    }
    let pattern = spec.pattern_cells();
    let period = if spec.total_cells() >= pattern {
        pattern
    } else {
        spec.total_cells()
    };
    LadderNetwork::new(elements, Some(period))
}

pub fn expand_leaf(spec: &LeafSpec) -> Result<LadderNetwork, CircuitError> {
    spec.validate()?;
    let resonator_cells = spec.resonator_cells();
    let inductor = &spec.base_cell.inductor;
    let mut elements =
        Vec::with_capacity(2 * spec.total_cells() + resonator_cells.len() * spec.num_blocks);
    for _ in 0..spec.num_blocks {
        for i in 0..spec.cells_per_block_period {
            push_cell(&mut elements, inductor, spec.base_cell.shunt_capacitance);
            if resonator_cells.contains(&i) {
                elements.push(Element::ShuntResonator {
                    resonant_frequency: spec.resonator.resonant_frequency,
                    q: spec.resonator.loaded_q,
                    multiplicity: 2,
                });
            }
        }
    }
    LadderNetwork::new(elements, Some(spec.cells_per_block_period))
}
