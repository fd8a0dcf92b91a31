//! Command-line driver for the discrete Riemannian gradient experiments.
//!
//! Every subcommand is a library function returning a typed report, so the
//! binary in `main.rs` is a thin wrapper and tests can call commands
//! directly. Runs write `log.csv`, `report.txt` and a TOML `manifest.txt`
//! into `--out`; `drg replay` re-runs a manifest.

// `!(x <= t)` is deliberate throughout: NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod commands;
mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::*;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "drg",
    version,
    about = "Derivative-free discrete Riemannian gradient optimization"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rayleigh quotient on the sphere.
    Rayleigh(RayleighArgs),
    /// Brockett trace energy on SO(m).
    Brockett(BrockettArgs),
    /// Phase-image TV denoising.
    Insar(InsarArgs),
    /// Tensor-field TV denoising.
    Dti(DtiArgs),
    /// Property suites.
    Verify(VerifyArgs),
    /// Re-run the configuration stored in a manifest.
    Replay {
        manifest: PathBuf,
        /// Output directory for the new run.
        #[arg(long)]
        out: PathBuf,
    },
}

/// Runs one command and returns the text to print.
pub fn execute(command: Command) -> Result<String, CliError> {
    match command {
        Command::Rayleigh(a) => cmd_rayleigh(&a).map(|r| r.summary()),
        Command::Brockett(a) => cmd_brockett(&a).map(|r| r.summary()),
        Command::Insar(a) => cmd_insar(&a).map(|r| r.summary()),
        Command::Dti(a) => cmd_dti(&a).map(|r| r.summary()),
        Command::Verify(a) => {
            let report = cmd_verify(&a)?;
            print!("{}", report.summary());
            verify::check(&report).map(|_| String::new())
        }
        Command::Replay { manifest, out } => execute(replay_command(&manifest, out)?),
    }
}

/// Rebuilds the command recorded in `manifest`, writing into `out`.
pub fn replay_command(manifest: &std::path::Path, out: PathBuf) -> Result<Command, CliError> {
    use output::{config_from, read_manifest};
    let (name, config) = read_manifest(manifest)?;
    Ok(match name.as_str() {
        "rayleigh" => {
            let mut a: RayleighArgs = config_from(config)?;
            a.flags.out = out;
            Command::Rayleigh(a)
        }
        "brockett" => {
            let mut a: BrockettArgs = config_from(config)?;
            a.flags.out = out;
            Command::Brockett(a)
        }
        "insar" => {
            let mut a: InsarArgs = config_from(config)?;
            a.flags.out = out;
            Command::Insar(a)
        }
        "dti" => {
            let mut a: DtiArgs = config_from(config)?;
            a.flags.out = out;
            Command::Dti(a)
        }
        other => return Err(CliError::Config(format!("cannot replay command `{other}`"))),
    })
}
