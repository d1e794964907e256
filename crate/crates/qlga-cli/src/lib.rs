//! Command-line front end for the `qlga` lattice-gas simulator.
//!
//! Subcommands read a TOML or JSON config describing the lattice, collision
//! rule, potentials, and initial state, then write CSV/JSON artifacts into
//! an output directory.  Exit codes distinguish failure classes:
//!
//! * `2` — usage errors: bad flags, malformed configs, invalid parameters.
//! * `3` — capacity errors: the requested problem exceeds a size cap.
//! * `4` — numeric errors: unitarity violations, non-convergence, branch
//!   ambiguity, and similar runtime diagnostics.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;

/// CLI failure, classified by the exit code it should map to.
#[derive(Debug)]
pub enum CliError {
    /// Caller mistake: bad arguments, unreadable or invalid config.
    Usage(String),
    /// The requested computation exceeds a hard size cap.
    Capacity(String),
    /// The computation ran but failed a numeric guarantee.
    Numeric(String),
}

impl CliError {
    /// Process exit code for this failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Capacity(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Capacity(msg) => write!(f, "capacity error: {msg}"),
            CliError::Numeric(msg) => write!(f, "numeric error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<qlga::Error> for CliError {
    fn from(err: qlga::Error) -> Self {
        use qlga::Error::*;
        match err {
            CapacityExceeded { .. } => CliError::Capacity(err.to_string()),
            InvalidParameter(_)
            | NonUnitPhase { .. }
            | UnsupportedSector { .. }
            | ResolutionTooCoarse { .. } => CliError::Usage(err.to_string()),
            NotUnitary { .. }
            | ToleranceViolation(_)
            | Convergence(_)
            | BranchAmbiguity { .. }
            | DegenerateMass(_)
            | NonRealMass { .. } => CliError::Numeric(err.to_string()),
        }
    }
}

/// Quantum lattice-gas simulator.
#[derive(Debug, Parser)]
#[command(name = "qlga", version, about)]
pub struct Cli {
    /// Size of the rayon thread pool (default: one thread per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve an initial state and record norm, marginal, and final state.
    Evolve {
        /// Path to a TOML or JSON run config.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Diagonalize the one-step operator; optionally analyze bound states.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Measure the dispersion relation along one axis and fit a mass.
    Dispersion {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the two closed-form mass expressions against measurement.
    Arbitrate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Closed-form resource estimates for a problem size.
    Estimate {
        /// Sites per axis.
        #[arg(long)]
        q: u64,
        /// Spatial dimension.
        #[arg(long)]
        d: u32,
        /// Particle count.
        #[arg(long)]
        n: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Write `contents` to `dir/name`, creating `dir` first.
pub(crate) fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

/// Run a parsed command line.  The rayon pool must already be configured.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Evolve { config, out } => commands::evolve(&config::load(config)?, out),
        Command::Spectrum { config, out } => commands::spectrum(&config::load(config)?, out),
        Command::Dispersion { config, out } => commands::dispersion(&config::load(config)?, out),
        Command::Arbitrate { config, out } => commands::arbitrate(&config::load(config)?, out),
        Command::Estimate { q, d, n, out } => commands::estimate(*q, *d, *n, out),
    }
}
