//! `workbench`: command-line driver for the entropy and hyperfinite experiments.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use config::{Config, SEED_ENV};
use error::CliError;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    /// Normalized information along horospherical classes.
    SmbRun,
    /// Cocycle entropy estimates by level.
    EntropySweep,
    /// Disjoint covering from chain classes.
    CoveringDemo,
    /// Følner defects of finite-order automorphisms.
    FolnerReport,
    /// Class averages across independent starts.
    ErgodicAvg,
    /// Subadditivity checks and the limit harness.
    SubadditiveSweep,
    /// Exact identities; fails on any mismatch.
    Selftest,
}

/// Experiments are configured by an INI file and `--key value` overrides.
/// Common keys: seed, out (CSV path), json (summary path), --bits.
#[derive(Debug, Parser)]
#[command(name = "workbench", version, about)]
struct Args {
    command: Command,
    /// INI file; sections only group keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `--key value` overrides.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    overrides: Vec<String>,
}

fn run(args: &Args) -> Result<(), CliError> {
    let env_seed = std::env::var(SEED_ENV).ok();
    let cfg = Config::load(args.config.as_deref(), &args.overrides, env_seed)?;
    let artifacts = match args.command {
        Command::SmbRun => commands::smb_run(&cfg),
        Command::EntropySweep => commands::entropy_sweep(&cfg),
        Command::CoveringDemo => commands::covering_demo(&cfg),
        Command::FolnerReport => commands::folner_report(&cfg),
        Command::ErgodicAvg => commands::ergodic_avg(&cfg),
        Command::SubadditiveSweep => commands::subadditive_sweep(&cfg),
        Command::Selftest => commands::selftest(&cfg),
    }?;
    output::emit(&artifacts, cfg.raw("out"), cfg.raw("json"))?;
    match artifacts.violation {
        Some(v) => Err(CliError::Invariant(v)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
