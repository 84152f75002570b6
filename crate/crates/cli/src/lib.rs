//! `fracap` — config-driven front end for the fractional-capacity toolkit.
//!
//! ```text
//! fracap <assemble|solve|capacity|gamma-test|
//!         reproduce-1d|reproduce-spaces|reproduce-p0>
//!        [--config <file>] [--out <dir>] [--n <int>] [--s <real>]
//! ```
//!
//! The first four subcommands read a JSON config (see [`config`]); the
//! `reproduce-*` subcommands run embedded presets and only accept the
//! override flags. Exit codes: 0 on success (a non-converged solve still
//! exits 0 and flags `"converged": false` in its report), 2 on config or
//! usage errors, 3 on numeric failures.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

pub mod commands;
pub mod config;
pub mod expr;
pub mod output;

/// CLI-level error: everything maps onto the exit-code contract.
#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or config document (exit 2).
    Config(String),
    /// Failure propagated from the numeric core; splits into exit 2
    /// (invalid problem) or 3 (numeric breakdown) by variant.
    Core(fracap_core::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<fracap_core::Error> for CliError {
    fn from(e: fracap_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                fracap_core::Error::Linalg(_) | fracap_core::Error::QuadratureBudget(_) => 3,
                _ => 2,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "fracap",
    version,
    about = "Finite-element toolkit for fractional-order spaces: assembly, sparse solves, capacities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the mesh element count.
    #[arg(long)]
    n: Option<usize>,
    /// Override the fractional order.
    #[arg(long)]
    s: Option<f64>,
}

#[derive(Debug, Args)]
struct PresetArgs {
    /// Not accepted here: the reproduce commands run embedded presets.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the mesh element count (default 512).
    #[arg(long)]
    n: Option<usize>,
    /// Override the fractional order.
    #[arg(long)]
    s: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Assemble the Gram and mass matrices and dump them as dense text.
    Assemble(CommonArgs),
    /// Run the regularized tracking solve and write solution + report.
    Solve(CommonArgs),
    /// Compute capacities of configured interval sets with property checks.
    Capacity(CommonArgs),
    /// Run a measure-sequence convergence test.
    #[command(name = "gamma-test")]
    GammaTest(CommonArgs),
    /// Preset: quadratic-target tracking run with support diagnostics.
    #[command(name = "reproduce-1d")]
    Reproduce1d(PresetArgs),
    /// Preset: the same problem across space realizations, with a
    /// shape-comparison table.
    #[command(name = "reproduce-spaces")]
    ReproduceSpaces(PresetArgs),
    /// Preset: zero-norm schedule study plus a small-p baseline.
    #[command(name = "reproduce-p0")]
    ReproduceP0(PresetArgs),
}

fn load_config(args: &CommonArgs) -> Result<config::ConfigDoc, CliError> {
    let mut doc = config::ConfigDoc::from_path(&args.config)?;
    doc.apply_overrides(args.n, args.s, args.out.clone())?;
    Ok(doc)
}

fn preset_overrides(args: PresetArgs) -> Result<(Option<usize>, Option<f64>, Option<PathBuf>), CliError> {
    if args.config.is_some() {
        return Err(CliError::Config(
            "reproduce commands run an embedded preset; use --n/--s/--out to adjust it".into(),
        ));
    }
    Ok((args.n, args.s, args.out))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Assemble(args) => commands::cmd_assemble(&load_config(&args)?),
        Command::Solve(args) => commands::cmd_solve(&load_config(&args)?),
        Command::Capacity(args) => commands::cmd_capacity(&load_config(&args)?),
        Command::GammaTest(args) => commands::cmd_gamma_test(&load_config(&args)?),
        Command::Reproduce1d(args) => {
            let (n, s, out) = preset_overrides(args)?;
            commands::cmd_reproduce_1d(n, s, out)
        }
        Command::ReproduceSpaces(args) => {
            let (n, s, out) = preset_overrides(args)?;
            commands::cmd_reproduce_spaces(n, s, out)
        }
        Command::ReproduceP0(args) => {
            let (n, s, out) = preset_overrides(args)?;
            commands::cmd_reproduce_p0(n, s, out)
        }
    }
}

/// Parse arguments from the process environment, run, and return the
/// process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("fracap: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_codes_follow_the_contract() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(
            CliError::Core(fracap_core::Error::InvalidInput("x".into())).exit_code(),
            2
        );
        assert_eq!(
            CliError::Core(fracap_core::Error::BadOrder {
                s: 0.5,
                reason: "x".into()
            })
            .exit_code(),
            2
        );
        assert_eq!(
            CliError::Core(fracap_core::Error::Linalg("x".into())).exit_code(),
            3
        );
        assert_eq!(
            CliError::Core(fracap_core::Error::QuadratureBudget("x".into())).exit_code(),
            3
        );
    }

    #[test]
    fn preset_rejects_config_flag() {
        let args = PresetArgs {
            config: Some(PathBuf::from("x.json")),
            out: None,
            n: None,
            s: None,
        };
        assert!(matches!(preset_overrides(args), Err(CliError::Config(_))));
    }

    #[test]
    fn cli_parses_all_subcommands() {
        for cmd in ["assemble", "solve", "capacity", "gamma-test"] {
            let cli = Cli::try_parse_from(["fracap", cmd, "--config", "c.json", "--n", "32"]);
            assert!(cli.is_ok(), "{cmd} failed to parse");
        }
        for cmd in ["reproduce-1d", "reproduce-spaces", "reproduce-p0"] {
            let cli = Cli::try_parse_from(["fracap", cmd, "--out", "d", "--s", "0.3"]);
            assert!(cli.is_ok(), "{cmd} failed to parse");
        }
        assert!(Cli::try_parse_from(["fracap", "solve"]).is_err());
    }
}
