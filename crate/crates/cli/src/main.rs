use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use ki_twpa::io::{
    load_config, run, ErrorCategory, OutputFormat, RunError, RunOverrides, Subcommand,
    MANIFEST_NAME,
};

#[derive(Debug, Parser)]
#[command(
    name = "ki-twpa",
    version,
    about = "Kinetic-inductance TWPA design and gain simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, overriding `output.directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Worker threads for the engines (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Signal seed relative to the pump, dB.
    #[arg(long, global = true, allow_hyphen_values = true)]
    seed_level_db: Option<f64>,

    /// Fail on analysis warnings and on failed sweep points.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Debug, Clone, Copy, clap::Subcommand)]
enum Command {
    /// Expand the design and write its netlist.
    Design,
    /// Bloch dispersion and stopband report.
    Dispersion,
    /// S-parameters of the full device.
    Linear,
    /// Parametric gain profile and metrics.
    Gain,
    /// Third-harmonic generation along the device.
    Harmonics,
    /// Gain metrics over the configured sweep axes.
    Sweep,
    /// Fit I* to the target peak gain.
    Calibrate,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Design => Subcommand::Design,
            Command::Dispersion => Subcommand::Dispersion,
            Command::Linear => Subcommand::Linear,
            Command::Gain => Subcommand::Gain,
            Command::Harmonics => Subcommand::Harmonics,
            Command::Sweep => Subcommand::Sweep,
            Command::Calibrate => Subcommand::Calibrate,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Touchstone,
    All,
}

impl FormatArg {
    fn formats(self) -> Vec<OutputFormat> {
        match self {
            FormatArg::Csv => vec![OutputFormat::Csv],
            FormatArg::Touchstone => vec![OutputFormat::Touchstone],
            FormatArg::All => vec![
                OutputFormat::Csv,
                OutputFormat::Touchstone,
                OutputFormat::Netlist,
            ],
        }
    }
}

fn report(err: &dyn std::error::Error) {
    eprintln!("error: {err}");
    let mut source = err.source();
    while let Some(s) = source {
        eprintln!("  caused by: {s}");
        source = s.source();
    }
}

fn fail(category: ErrorCategory, err: &dyn std::error::Error) -> ExitCode {
    report(err);
    ExitCode::from(category.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config_err = |msg: &str| {
        eprintln!("error: {msg}");
        ExitCode::from(ErrorCategory::Config.exit_code() as u8)
    };

    let Some(path) = cli.config.as_deref() else {
        return config_err("--config <path> is required");
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return config_err("--threads must be at least 1");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            return fail(ErrorCategory::Config, &e);
        }
    }
    if cli
        .seed_level_db
        .is_some_and(|s| !(s.is_finite() && s < 0.0))
    {
        return config_err("--seed-level-db must be a negative number of dB");
    }

    let config = match load_config(path) {
        Ok(c) => c,
        Err(e) => {
            let e = RunError::from(e);
            return fail(e.category(), &e);
        }
    };
    let overrides = RunOverrides {
        output_dir: cli.out.clone(),
        formats: cli.format.map(FormatArg::formats),
        seed_level_db: cli.seed_level_db,
        strict: cli.strict,
    };
    match run(cli.command.into(), &config, &overrides) {
        Ok(manifest) => {
            let dir = overrides.output_dir.unwrap_or_else(|| config.output_dir());
            for f in &manifest.files {
                println!("{}", dir.join(&f.path).display());
            }
            println!("{}", dir.join(MANIFEST_NAME).display());
            for w in &manifest.warnings {
                eprintln!("warning: {w}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(e.category(), &e),
    }
}
