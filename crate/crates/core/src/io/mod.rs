//! File formats, configuration and run orchestration.

mod config;
mod netlist;
mod run;
mod tables;
mod touchstone;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use config::{
    load_config, parse_config, AnalysisSection, ConfigError, ConfigFile, DesignSection,
    FishboneSection, HarmonicSection, LeafSection, NetlistSection, OutputFormat, OutputSection,
    ResonatorSection, RunConfig, SweepAxisSection,
};
pub use netlist::{parse_netlist, write_netlist, NETLIST_HEADER};
pub use run::{
    run, EmittedFile, ErrorCategory, RunError, RunManifest, RunOverrides, Subcommand, MANIFEST_NAME,
};
pub use tables::{
    calibration_report, dispersion_csv, gain_csv, harmonic_csv, harmonic_report, linear_csv,
    metrics_csv, metrics_report, stopband_report, sweep_csv,
};
pub use touchstone::{parse_touchstone, write_touchstone, TouchstoneData};

/// Parse failure in a text format, with a 1-based line number.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

impl FormatError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

/// Scientific notation with `digits` significant digits.
pub fn format_sci(x: f64, digits: usize) -> String {
    format!("{:.*e}", digits.saturating_sub(1), x)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn parse_f64(token: &str, line: usize, what: &str) -> Result<f64, FormatError> {
    let v: f64 = token
        .parse()
        .map_err(|_| FormatError::new(line, format!("invalid {what} `{token}`")))?;
    if !v.is_finite() {
        return Err(FormatError::new(
            line,
            format!("non-finite {what} `{token}`"),
        ));
    }
    Ok(v)
}
