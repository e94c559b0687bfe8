//! Config parsing, experiment orchestration and deterministic output.

mod config;
mod emit;
mod manifest;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use config::{
    AnalysisConfig, BathConfig, Coupling, ExperimentConfig, FieldMode, OmegaGrid, OutputConfig,
    SweepAxis, SweepConfig, SystemConfig, SCHEMA_VERSION,
};
pub use emit::{emit, Table};
pub use manifest::{Command, Derived, RunManifest, MANIFEST_SCHEMA};
pub use run::{compute_spectrum, run, RunOptions};

use crate::error::SmeError;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_INVALID: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;
pub const EXIT_IO: u8 = 5;

/// Exit status for a failed run: bad config or usage, physics validation or
/// invalid input, numerical abort, and I/O are kept apart.
pub fn exit_code(e: &SmeError) -> u8 {
    match e {
        SmeError::Config(_) => EXIT_CONFIG,
        SmeError::Io(_) => EXIT_IO,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_INVALID,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "spinsme",
    version,
    about = "Homodyne spectroscopy of a qubit in a spin bath"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML config, or a manifest.json from an earlier run.
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run even when the validity report fails.
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Stationary current spectrum through quantum regression.
    Spectrum(Common),
    /// One conditioned trajectory in a sampled bath sector.
    Trajectory(Common),
    /// Trajectory ensemble vs the unconditional evolution, and its periodogram.
    Ensemble(Common),
    /// Spectra over a parameter axis.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Parameter to vary; overrides the config's sweep
        #[arg(long, value_enum, requires = "values")]
        axis: Option<SweepAxis>,
        /// Comma-separated values for the axis
        #[arg(long, value_delimiter = ',', requires = "axis")]
        values: Option<Vec<f64>>,
    },
    /// Two systems sharing a bath draw with probability r.
    Correlated(Common),
    /// Full system ⊗ cavity evolution vs the reduced equation.
    Validate(Common),
}

fn dispatch(cli: Cli) -> crate::Result<RunManifest> {
    let (command, common, sweep) = match cli.command {
        Sub::Spectrum(c) => (Command::Spectrum, c, None),
        Sub::Trajectory(c) => (Command::Trajectory, c, None),
        Sub::Ensemble(c) => (Command::Ensemble, c, None),
        Sub::Correlated(c) => (Command::Correlated, c, None),
        Sub::Validate(c) => (Command::Validate, c, None),
        Sub::Sweep {
            common,
            axis,
            values,
        } => {
            let sweep = axis
                .zip(values)
                .map(|(axis, values)| SweepConfig { axis, values });
            (Command::Sweep, common, sweep)
        }
    };
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.sim.seed = seed;
    }
    run(
        command,
        &cfg,
        &RunOptions {
            out: common.out,
            force: common.force,
            sweep,
        },
    )
}

/// Entry point of the `spinsme` binary.
pub fn main_entry() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match dispatch(cli) {
        Ok(m) => {
            println!(
                "wrote {} to {} (manifest sha256={})",
                m.outputs.join(", "),
                m.config.output.dir,
                m.content_hash()
            );
            ExitCode::from(EXIT_OK)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
