use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{ConfigError, OutputFormat, RunConfig};
use super::{sha256_hex, tables, write_netlist, write_touchstone};
use crate::analysis::{calibrate_istar, sweep, AnalysisError, Pipeline};
use crate::circuit::LadderNetwork;
use crate::fwm::{medium_for_network, third_harmonic_scan, KerrCoefficient, STOPBAND_MIN_DEPTH_NP};
use crate::linear::{find_stopbands, network_dispersion, network_s_parameters, DispersionCurve};

/// Reference impedance of emitted S-parameters.
const PORT_IMPEDANCE: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subcommand {
    Design,
    Dispersion,
    Linear,
    Gain,
    Harmonics,
    Sweep,
    Calibrate,
}

impl Subcommand {
    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::Design => "design",
            Subcommand::Dispersion => "dispersion",
            Subcommand::Linear => "linear",
            Subcommand::Gain => "gain",
            Subcommand::Harmonics => "harmonics",
            Subcommand::Sweep => "sweep",
            Subcommand::Calibrate => "calibrate",
        }
    }
}

/// Command-line values that take precedence over the config document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOverrides {
    pub output_dir: Option<PathBuf>,
    pub formats: Option<Vec<OutputFormat>>,
    pub seed_level_db: Option<f64>,
    /// Treat analysis warnings and failed sweep points as errors.
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Numeric,
    Io,
}

impl ErrorCategory {
    pub fn exit_code(&self) -> i32 {
        match self {
            ErrorCategory::Config => 2,
            ErrorCategory::Numeric => 3,
            ErrorCategory::Io => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("`{subcommand}` cannot run with this config: {reason}")]
    Mismatch {
        subcommand: &'static str,
        reason: String,
    },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("strict mode: {0}")]
    Strict(String),
    #[error("cannot write {path}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    pub fn category(&self) -> ErrorCategory {
        match self {
            RunError::Config(ConfigError::Read { .. }) => ErrorCategory::Io,
            RunError::Config(_) | RunError::Mismatch { .. } => ErrorCategory::Config,
            RunError::Analysis(_) | RunError::Strict(_) => ErrorCategory::Numeric,
            RunError::Write { .. } => ErrorCategory::Io,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmittedFile {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: Subcommand,
    pub config_digest: String,
    /// The config with defaults filled in.
    pub config: serde_json::Value,
    pub duration_s: f64,
    pub files: Vec<EmittedFile>,
    pub warnings: Vec<String>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

struct Outputs {
    files: Vec<(String, String)>,
    warnings: Vec<String>,
}

impl Outputs {
    fn new() -> Self {
        Self {
            files: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn add(&mut self, name: &str, content: String) {
        self.files.push((name.to_string(), content));
    }
}

fn mismatch(sub: Subcommand, reason: impl Into<String>) -> RunError {
    RunError::Mismatch {
        subcommand: sub.name(),
        reason: reason.into(),
    }
}

/// Runs one subcommand and writes its files plus `manifest.json` into the
/// output directory.
pub fn run(
    sub: Subcommand,
    config: &RunConfig,
    overrides: &RunOverrides,
) -> Result<RunManifest, RunError> {
    let started = Instant::now();
    let mut config = config.clone();
    if let Some(seed) = overrides.seed_level_db {
        config.file.analysis.gain.seed_level_db = seed;
    }
    if let Some(f) = &overrides.formats {
        config.file.output.formats = f.clone();
    }
    // where the files go does not change what they contain
    let config_digest = config.digest();
    let out_dir = overrides
        .output_dir
        .clone()
        .unwrap_or_else(|| config.output_dir());
    config.file.output.directory = out_dir.clone();

    check(sub, &config)?;
    let outputs = compute(sub, &config)?;
    if overrides.strict && !outputs.warnings.is_empty() {
        return Err(RunError::Strict(outputs.warnings.join("; ")));
    }

    std::fs::create_dir_all(&out_dir).map_err(|source| RunError::Write {
        path: out_dir.clone(),
        source,
    })?;
    let mut files = Vec::new();
    for (name, content) in &outputs.files {
        write(&out_dir.join(name), content.as_bytes())?;
        files.push(EmittedFile {
            path: name.clone(),
            sha256: sha256_hex(content.as_bytes()),
            bytes: content.len(),
        });
    }
    let manifest = RunManifest {
        tool: "ki-twpa".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: sub,
        config_digest,
        config: serde_json::to_value(&config.file).expect("config serializes"),
        duration_s: started.elapsed().as_secs_f64(),
        files,
        warnings: outputs.warnings,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write(&out_dir.join(MANIFEST_NAME), text.as_bytes())?;
    Ok(manifest)
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    std::fs::write(path, bytes).map_err(|source| RunError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Rejects subcommand and config combinations before any computation.
fn check(sub: Subcommand, config: &RunConfig) -> Result<(), RunError> {
    let a = &config.file.analysis;
    let o = &config.file.output;
    match sub {
        Subcommand::Design | Subcommand::Dispersion => {}
        Subcommand::Linear => {
            if !o.wants(OutputFormat::Csv) && !o.wants(OutputFormat::Touchstone) {
                return Err(mismatch(sub, "needs the csv or touchstone output format"));
            }
        }
        Subcommand::Harmonics => {
            if !a.gain.include_third_harmonic {
                return Err(mismatch(
                    sub,
                    "analysis.gain.include_third_harmonic must be true",
                ));
            }
            config.pump()?;
        }
        Subcommand::Gain | Subcommand::Calibrate => {
            config.pipeline()?;
        }
        Subcommand::Sweep => {
            let p = config.pipeline()?;
            let axes = config.sweep_axes()?;
            if axes.is_empty() {
                return Err(mismatch(sub, "no [[analysis.sweep]] axes"));
            }
            let mut probe = p.clone();
            for axis in &axes {
                axis.parameter
                    .apply(&mut probe, axis.values[0])
                    .map_err(|e| mismatch(sub, e.to_string()))?;
            }
        }
    }
    Ok(())
}

fn periodic_view(network: &LadderNetwork) -> LadderNetwork {
    match network.period_cells() {
        Some(_) => network.clone(),
        None => LadderNetwork::new(network.elements().to_vec(), Some(network.total_cells()))
            .expect("valid network"),
    }
}

fn dispersion_of(
    network: &LadderNetwork,
    config: &RunConfig,
) -> Result<(DispersionCurve, f64), RunError> {
    let net = periodic_view(network);
    let a = &config.file.analysis;
    let curve = network_dispersion(&net, &a.grid, &a.linear).map_err(AnalysisError::from)?;
    let periods = net.total_cells() as f64 / curve.cells_per_period as f64;
    Ok((curve, STOPBAND_MIN_DEPTH_NP / periods))
}

fn compute(sub: Subcommand, config: &RunConfig) -> Result<Outputs, RunError> {
    let digits = config.file.output.precision;
    let o = &config.file.output;
    let a = &config.file.analysis;
    let mut out = Outputs::new();
    match sub {
        Subcommand::Design => {
            out.add("design.net", write_netlist(&config.design.network()?));
        }
        Subcommand::Dispersion => {
            let (curve, depth) = dispersion_of(&config.design.network()?, config)?;
            if o.wants(OutputFormat::Csv) {
                out.add("dispersion.csv", tables::dispersion_csv(&curve, digits));
            }
            out.add(
                "stopbands.txt",
                tables::stopband_report(&find_stopbands(&curve, depth), digits),
            );
        }
        Subcommand::Linear => {
            let network = config.design.network()?;
            let set = network_s_parameters(&network, &a.grid, PORT_IMPEDANCE, &a.linear)
                .map_err(AnalysisError::from)?;
            if o.wants(OutputFormat::Touchstone) {
                out.add("sparams.s2p", write_touchstone(&set));
            }
            if o.wants(OutputFormat::Csv) {
                let (curve, _) = dispersion_of(&network, config)?;
                out.add("linear.csv", tables::linear_csv(&set, &curve, digits));
            }
        }
        Subcommand::Gain => {
            let (profile, metrics) = config.pipeline()?.run()?;
            add_gain(&mut out, &profile, &metrics, digits);
        }
        Subcommand::Harmonics => {
            let pump = config.pump()?;
            let opts = config.harmonic_options();
            let mut f_max = 3.0 * pump.frequency;
            if let Some(fs) = opts.signal_frequency {
                f_max = f_max.max(fs).max(2.0 * pump.frequency - fs);
            }
            let network = config.design.network()?;
            let medium = medium_for_network(&network, a.linear, 1.02 * f_max)
                .map_err(AnalysisError::from)?;
            let i_star = config
                .design
                .i_star()
                .ok_or_else(|| mismatch(sub, "network has no series inductor"))?;
            let kerr = KerrCoefficient::for_medium(medium.as_ref(), pump.frequency, i_star)
                .map_err(AnalysisError::from)?;
            let scan = third_harmonic_scan(medium.as_ref(), &kerr, pump, &opts)
                .map_err(AnalysisError::from)?;
            out.add("harmonics.csv", tables::harmonic_csv(&scan, digits));
            out.add("harmonics.txt", tables::harmonic_report(&scan, digits));
        }
        Subcommand::Sweep => {
            let result = sweep(&config.pipeline()?, &config.sweep_axes()?)?;
            if result.failures() > 0 {
                out.warnings.push(format!(
                    "{} of {} sweep points failed",
                    result.failures(),
                    result.points.len()
                ));
            }
            out.add("sweep.csv", tables::sweep_csv(&result, digits));
        }
        Subcommand::Calibrate => {
            let pipeline = config.pipeline()?;
            let cal = calibrate_istar(&pipeline, &a.calibration)?;
            out.add("calibration.txt", tables::calibration_report(&cal, digits));
            let calibrated = Pipeline {
                design: pipeline.design.with_i_star(cal.i_star),
                ..pipeline
            };
            let (profile, metrics) = calibrated.run()?;
            add_gain(&mut out, &profile, &metrics, digits);
        }
    }
    Ok(out)
}

fn add_gain(
    out: &mut Outputs,
    profile: &crate::fwm::GainProfile,
    metrics: &crate::analysis::GainMetrics,
    digits: usize,
) {
    out.warnings.extend(metrics.warnings.iter().cloned());
    out.add("gain.csv", tables::gain_csv(profile, digits));
    out.add("metrics.txt", tables::metrics_report(metrics, digits));
    out.add("metrics.csv", tables::metrics_csv(metrics, digits));
}
