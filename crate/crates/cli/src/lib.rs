//! Command-line front end: snapshot CSVs in, self-describing JSON reports out.
//!
//! Every report carries the tool version, the full argument echo, the seed
//! and all tolerances. Exit codes are stable: see [`CliError::exit_code`].

pub mod commands;
pub mod error;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use datared_core::Tolerances;
use serde::Serialize;

pub use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "datared", version, about = "Reduced-order models and controllers from snapshot data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select a basis, build Ā and K for θ = E, and test invariance.
    Reduce(commands::reduce::ReduceArgs),
    /// Search the reduced family for a stable member via the LMI.
    Stabilize(commands::stabilize::StabilizeArgs),
    /// Plan the s-step steering law between two states of the data subspace.
    Steer(commands::steer::SteerArgs),
    /// Write a synthetic snapshot fixture from a seeded ground-truth system.
    SynthData(commands::synth::SynthArgs),
    /// Run a seeded oracle campaign checking the model identities.
    Verify(commands::verify::VerifyArgs),
}

/// Options shared by every command. Unset tolerances take the library
/// defaults (or the campaign file's values for `verify`).
#[derive(Clone, Debug, Args, Serialize)]
pub struct CommonArgs {
    /// Directory holding (or receiving) X.csv, U.csv, Xplus.csv.
    #[arg(long, default_value = ".")]
    pub data_dir: PathBuf,
    /// Report path; defaults to `<data-dir>/<command>.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Relative singular-value threshold for numerical rank.
    #[arg(long)]
    pub rank_tol: Option<f64>,
    /// Relative tolerance of the invariance test.
    #[arg(long)]
    pub inv_tol: Option<f64>,
    /// Margin replacing strict LMI inequalities.
    #[arg(long)]
    pub margin: Option<f64>,
    /// Relative tolerance for subspace membership.
    #[arg(long)]
    pub subspace_tol: Option<f64>,
    /// Relative threshold of the reachability rank test.
    #[arg(long)]
    pub reach_tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl CommonArgs {
    /// Overrides `base` with the tolerances given on the command line.
    pub fn tolerances_over(&self, base: Tolerances) -> Result<Tolerances> {
        let t = Tolerances {
            rank_tol: self.rank_tol.unwrap_or(base.rank_tol),
            inv_tol: self.inv_tol.unwrap_or(base.inv_tol),
            lmi_margin: self.margin.unwrap_or(base.lmi_margin),
            subspace_tol: self.subspace_tol.unwrap_or(base.subspace_tol),
            reach_tol: self.reach_tol.unwrap_or(base.reach_tol),
        };
        t.validate()?;
        Ok(t)
    }

    pub fn tolerances(&self) -> Result<Tolerances> {
        self.tolerances_over(Tolerances::default())
    }

    pub fn report_path(&self, command: &str) -> PathBuf {
        self.out
            .clone()
            .unwrap_or_else(|| self.data_dir.join(format!("{command}.json")))
    }
}

/// Successful termination; `Infeasible` still writes its report.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    Infeasible,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::Infeasible => 3,
        }
    }
}

pub fn run(cli: &Cli) -> Result<Status> {
    match &cli.command {
        Command::Reduce(a) => commands::reduce::run(a),
        Command::Stabilize(a) => commands::stabilize::run(a),
        Command::Steer(a) => commands::steer::run(a),
        Command::SynthData(a) => commands::synth::run(a),
        Command::Verify(a) => commands::verify::run(a),
    }
}
