use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{parse_netlist, sha256_hex, FormatError};
use crate::analysis::{
    CalibrationSettings, Design, MetricOptions, Pipeline, SweepAxis, SweepParameter,
};
use crate::circuit::{FishboneSpec, LeafSpec, NonlinearInductorSpec, ResonatorSpec, UnitCellSpec};
use crate::fwm::{GainOptions, HarmonicOptions, Pump};
use crate::linear::{FrequencyGrid, LinearOptions};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("missing [{0}] section")]
    MissingSection(&'static str),
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("invalid netlist {path}")]
    Netlist {
        path: PathBuf,
        #[source]
        source: FormatError,
    },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub design: DesignSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    /// Identical devices in series.
    #[serde(default = "one")]
    pub cascade: usize,
    pub fishbone: Option<FishboneSection>,
    pub leaf: Option<LeafSection>,
    pub netlist: Option<NetlistSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FishboneSection {
    pub l0: f64,
    pub i_star: f64,
    pub shunt_capacitance: f64,
    pub cells_per_period: usize,
    pub loaded_cells: usize,
    pub loaded_cells_every_third: usize,
    pub capacitance_reduction_factor: f64,
    pub num_periods: usize,
    #[serde(default)]
    pub physical_cell_length: f64,
}

impl From<FishboneSection> for FishboneSpec {
    fn from(s: FishboneSection) -> Self {
        FishboneSpec {
            base_cell: UnitCellSpec {
                inductor: NonlinearInductorSpec {
                    l0: s.l0,
                    i_star: s.i_star,
                },
                shunt_capacitance: s.shunt_capacitance,
            },
            cells_per_period: s.cells_per_period,
            loaded_cells: s.loaded_cells,
            loaded_cells_every_third: s.loaded_cells_every_third,
            capacitance_reduction_factor: s.capacitance_reduction_factor,
            num_periods: s.num_periods,
            physical_cell_length: s.physical_cell_length,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorSection {
    pub resonant_frequency: f64,
    pub loaded_q: f64,
    pub pairs_per_block: usize,
    pub pair_separation_cells: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeafSection {
    pub l0: f64,
    pub i_star: f64,
    pub shunt_capacitance: f64,
    pub cells_per_block_period: usize,
    pub num_blocks: usize,
    pub resonator: ResonatorSection,
}

impl From<LeafSection> for LeafSpec {
    fn from(s: LeafSection) -> Self {
        LeafSpec {
            base_cell: UnitCellSpec {
                inductor: NonlinearInductorSpec {
                    l0: s.l0,
                    i_star: s.i_star,
                },
                shunt_capacitance: s.shunt_capacitance,
            },
            cells_per_block_period: s.cells_per_block_period,
            resonator: ResonatorSpec {
                resonant_frequency: s.resonator.resonant_frequency,
                loaded_q: s.resonator.loaded_q,
                pairs_per_block: s.resonator.pairs_per_block,
                pair_separation_cells: s.resonator.pair_separation_cells,
            },
            num_blocks: s.num_blocks,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetlistSection {
    /// Relative paths resolve against the config file's directory.
    pub path: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HarmonicSection {
    pub signal_frequency: Option<f64>,
    pub samples: usize,
}

impl Default for HarmonicSection {
    fn default() -> Self {
        let d = HarmonicOptions::default();
        Self {
            signal_frequency: d.signal_frequency,
            samples: d.samples,
        }
    }
}

/// Either explicit `values` or `start`/`stop`/`points`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxisSection {
    pub parameter: SweepParameter,
    pub values: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
}

impl SweepAxisSection {
    pub fn axis(&self) -> Result<SweepAxis, ConfigError> {
        let field = format!("analysis.sweep[{}]", self.parameter.name());
        match (&self.values, self.start, self.stop, self.points) {
            (Some(v), None, None, None) => Ok(SweepAxis {
                parameter: self.parameter,
                values: v.clone(),
            }),
            (None, Some(a), Some(b), Some(n)) => Ok(SweepAxis::linspace(self.parameter, a, b, n)),
            _ => Err(invalid(
                field,
                "give either `values` or all of `start`, `stop`, `points`",
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    pub linear: LinearOptions,
    /// Grid for dispersion and S-parameters.
    pub grid: FrequencyGrid,
    pub pump: Option<Pump>,
    pub signal_grid: Option<FrequencyGrid>,
    pub gain: GainOptions,
    pub harmonics: HarmonicSection,
    pub metrics: MetricOptions,
    pub calibration: CalibrationSettings,
    pub sweep: Vec<SweepAxisSection>,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            linear: LinearOptions::default(),
            grid: FrequencyGrid::device_default(),
            pump: None,
            signal_grid: None,
            gain: GainOptions::default(),
            harmonics: HarmonicSection::default(),
            metrics: MetricOptions::default(),
            calibration: CalibrationSettings::default(),
            sweep: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Touchstone,
    Netlist,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<OutputFormat>,
    /// Significant digits in CSV tables and reports.
    pub precision: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![
                OutputFormat::Csv,
                OutputFormat::Touchstone,
                OutputFormat::Netlist,
            ],
            precision: 12,
        }
    }
}

impl OutputSection {
    pub fn wants(&self, f: OutputFormat) -> bool {
        self.formats.contains(&f)
    }
}

/// A validated configuration with the design resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// The document with every default filled in.
    pub file: ConfigFile,
    /// Design after cascading.
    pub design: Design,
    /// Directory relative paths were resolved against.
    pub base_dir: PathBuf,
    netlist_digest: Option<String>,
}

impl RunConfig {
    /// Digest of the resolved document plus any referenced netlist.
    pub fn digest(&self) -> String {
        let mut text = serde_json::to_string(&self.file).expect("config serializes");
        if let Some(d) = &self.netlist_digest {
            text.push_str(d);
        }
        sha256_hex(text.as_bytes())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.base_dir.join(&self.file.output.directory)
    }

    pub fn pump(&self) -> Result<Pump, ConfigError> {
        self.file
            .analysis
            .pump
            .ok_or(ConfigError::MissingSection("analysis.pump"))
    }

    pub fn pipeline(&self) -> Result<Pipeline, ConfigError> {
        let a = &self.file.analysis;
        Ok(Pipeline {
            design: self.design.clone(),
            linear: a.linear,
            pump: self.pump()?,
            signal_grid: a
                .signal_grid
                .ok_or(ConfigError::MissingSection("analysis.signal_grid"))?,
            gain: a.gain,
            metrics: a.metrics,
        })
    }

    pub fn harmonic_options(&self) -> HarmonicOptions {
        let a = &self.file.analysis;
        HarmonicOptions {
            signal_frequency: a.harmonics.signal_frequency,
            seed_level_db: a.gain.seed_level_db,
            samples: a.harmonics.samples,
            undepleted: a.gain.undepleted,
            tolerances: a.gain.tolerances,
        }
    }

    pub fn sweep_axes(&self) -> Result<Vec<SweepAxis>, ConfigError> {
        self.file
            .analysis
            .sweep
            .iter()
            .map(SweepAxisSection::axis)
            .collect()
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config(&text, path, &base)
}

/// Parses and validates a config document. `origin` only labels messages.
pub fn parse_config(text: &str, origin: &Path, base_dir: &Path) -> Result<RunConfig, ConfigError> {
    let parse_err = |message: String| ConfigError::Parse {
        path: origin.to_path_buf(),
        message,
    };
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| parse_err(e.to_string()))?;
    if !table.contains_key("design") {
        return Err(ConfigError::MissingSection("design"));
    }
    let file: ConfigFile = toml::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    validate(file, base_dir)
}

fn validate(file: ConfigFile, base_dir: &Path) -> Result<RunConfig, ConfigError> {
    let d = &file.design;
    let present = [d.fishbone.is_some(), d.leaf.is_some(), d.netlist.is_some()]
        .iter()
        .filter(|&&b| b)
        .count();
    if present != 1 {
        return Err(invalid(
            "design",
            format!("needs exactly one of fishbone, leaf, netlist; found {present}"),
        ));
    }
    if d.cascade == 0 {
        return Err(invalid("design.cascade", "must be at least 1"));
    }
    let mut netlist_digest = None;
    let single = if let Some(s) = d.fishbone {
        let spec = FishboneSpec::from(s);
        spec.validate()
            .map_err(|e| invalid("design.fishbone", e.to_string()))?;
        Design::Fishbone(spec)
    } else if let Some(s) = d.leaf {
        let spec = LeafSpec::from(s);
        spec.validate()
            .map_err(|e| invalid("design.leaf", e.to_string()))?;
        Design::Leaf(spec)
    } else {
        let rel = &d.netlist.as_ref().expect("one variant present").path;
        let path = base_dir.join(rel);
        let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Read {
            path: path.clone(),
            source,
        })?;
        netlist_digest = Some(sha256_hex(text.as_bytes()));
        Design::Network(
            parse_netlist(&text).map_err(|source| ConfigError::Netlist { path, source })?,
        )
    };
    let design = single
        .cascaded(d.cascade)
        .map_err(|e| invalid("design.cascade", e.to_string()))?;

    let a = &file.analysis;
    a.grid
        .validate()
        .map_err(|e| invalid("analysis.grid", e.to_string()))?;
    if let Some(g) = &a.signal_grid {
        g.validate()
            .map_err(|e| invalid("analysis.signal_grid", e.to_string()))?;
    }
    if let Some(p) = &a.pump {
        if !(p.frequency.is_finite() && p.frequency > 0.0) {
            return Err(invalid(
                "analysis.pump.frequency",
                format!("must be positive, got {}", p.frequency),
            ));
        }
        if !(p.power.is_finite() && p.power >= 0.0) {
            return Err(invalid(
                "analysis.pump.power",
                format!("must be non-negative, got {}", p.power),
            ));
        }
    }
    if !(a.linear.bias_current.is_finite()
        && a.linear.loss_tangent.is_finite()
        && a.linear.loss_tangent >= 0.0)
    {
        return Err(invalid(
            "analysis.linear",
            "bias must be finite and loss tangent non-negative",
        ));
    }
    if a.harmonics.samples < 2 {
        return Err(invalid("analysis.harmonics.samples", "need at least 2"));
    }
    for s in &a.sweep {
        let axis = s.axis()?;
        if axis.values.is_empty() || axis.values.iter().any(|v| !v.is_finite()) {
            return Err(invalid(
                format!("analysis.sweep[{}]", s.parameter.name()),
                "needs finite values",
            ));
        }
    }
    let o = &file.output;
    if !(1..=17).contains(&o.precision) {
        return Err(invalid(
            "output.precision",
            format!("must be 1 to 17 significant digits, got {}", o.precision),
        ));
    }
    if o.formats.is_empty() {
        return Err(invalid("output.formats", "must list at least one format"));
    }
    Ok(RunConfig {
        file,
        design,
        base_dir: base_dir.to_path_buf(),
        netlist_digest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[design.fishbone]
l0 = 50e-12
i_star = 0.015
shunt_capacitance = 20e-15
cells_per_period = 22
loaded_cells = 2
loaded_cells_every_third = 4
capacitance_reduction_factor = 5.0
num_periods = 30
"#;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        parse_config(text, Path::new("test.cfg"), Path::new("."))
    }

    #[test]
    fn minimal_fishbone_fills_defaults() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.file.output.precision, 12);
        assert_eq!(c.file.analysis.grid, FrequencyGrid::device_default());
        match c.design {
            Design::Fishbone(s) => assert_eq!(s.num_periods, 30),
            _ => panic!("wrong design"),
        }
        assert!(c.pipeline().is_err());
    }

    #[test]
    fn cascade_multiplies_periods() {
        let text = format!("[design]\ncascade = 2\n{MINIMAL}");
        match parse(&text).unwrap().design {
            Design::Fishbone(s) => assert_eq!(s.num_periods, 60),
            _ => panic!("wrong design"),
        }
    }

    #[test]
    fn missing_design_names_the_section() {
        let e = parse("[output]\nprecision = 12\n").unwrap_err();
        assert!(matches!(e, ConfigError::MissingSection("design")), "{e}");
        assert!(e.to_string().contains("design"));
    }

    #[test]
    fn misspelled_key_fails_with_its_name() {
        let e = parse(&MINIMAL.replace("num_periods", "num_period")).unwrap_err();
        assert!(e.to_string().contains("num_period"), "{e}");
        let e = parse(&format!("{MINIMAL}\n[analysis.gain]\nseed_level = -60\n")).unwrap_err();
        assert!(e.to_string().contains("seed_level"), "{e}");
    }

    #[test]
    fn two_designs_are_rejected() {
        let text = format!("{MINIMAL}\n[design.netlist]\npath = \"x.net\"\n");
        assert!(matches!(
            parse(&text).unwrap_err(),
            ConfigError::Invalid { .. }
        ));
    }

    #[test]
    fn missing_netlist_file_fails_at_load() {
        let e = parse("[design.netlist]\npath = \"no/such/file.net\"\n").unwrap_err();
        assert!(matches!(e, ConfigError::Read { .. }));
    }

    #[test]
    fn sweep_axis_forms() {
        let text = format!(
            "{MINIMAL}\n[[analysis.sweep]]\nparameter = \"pump_power\"\nstart = 1e-5\nstop = 1e-4\npoints = 4\n\
             [[analysis.sweep]]\nparameter = \"i_star\"\nvalues = [0.01, 0.02]\n"
        );
        let axes = parse(&text).unwrap().sweep_axes().unwrap();
        assert_eq!(axes[0].values.len(), 4);
        assert_eq!(axes[1].values, vec![0.01, 0.02]);
        let bad = format!("{MINIMAL}\n[[analysis.sweep]]\nparameter = \"i_star\"\nstart = 1.0\n");
        assert!(parse(&bad).is_err());
    }

    #[test]
    fn digest_tracks_content() {
        let a = parse(MINIMAL).unwrap();
        let b = parse(&format!("# a comment\n{MINIMAL}")).unwrap();
        let c = parse(&MINIMAL.replace("num_periods = 30", "num_periods = 31")).unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), c.digest());
    }
}
