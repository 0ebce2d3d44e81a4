//! Batch front-end for the stripes solvers: a JSON config, optional flag
//! overrides, and CSV/JSON artifacts in one output directory.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{Mode, RunConfig};
pub use error::CliError;
pub use run::{run, FullSummary, OracleReport, Outcome, ReducedSummary, SweepReport};

#[derive(Debug, Parser)]
#[command(name = "stripes", version, about = "Reduced and full solves, rate sweeps and phase diagrams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Shooting solve of the reduced phase problem.
    Reduced,
    /// Constrained minimization of the coupled density/phase problem.
    Full,
    /// Geometric refinement sweep with a log-log rate fit.
    Sweep,
    /// Leading-order asymptotic predictions.
    Oracle,
    /// Regime, stripe count, φ(1) and β²F over a κ̃ × β table.
    PhaseDiagram,
}

impl Command {
    pub fn mode(self) -> Mode {
        match self {
            Command::Reduced => Mode::Reduced,
            Command::Full => Mode::Full,
            Command::Sweep => Mode::Sweep,
            Command::Oracle => Mode::Oracle,
            Command::PhaseDiagram => Mode::PhaseDiagram,
        }
    }
}

/// Each flag replaces the config field of the same name.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    pub grid: Option<usize>,
    #[arg(long, global = true)]
    pub quiet: bool,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    #[arg(long, global = true)]
    pub kappa_tilde: Option<f64>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, mut cfg: RunConfig) -> RunConfig {
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f.clone() { cfg.$f = Some(v); })* };
        }
        set!(out, grid, beta, kappa, kappa_tilde, epsilon, delta);
        cfg
    }
}

/// Parse, run and report; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let base = match &cli.overrides.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return e.exit_code();
            }
        },
        None => RunConfig::default(),
    };
    let cfg = cli.overrides.apply(base);
    match run(cli.command.mode(), &cfg) {
        Ok(outcome) => {
            if let Some(text) = outcome.stdout {
                println!("{text}");
            } else if !cli.overrides.quiet {
                println!("{}", outcome.message);
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
