//! Command-line front end of `fmp-core`: configuration layering, the `fmp`
//! subcommands and their CSV, JSON and SVG outputs.
//!
//! Every file written starts with a metadata block carrying the tool
//! version and the fully resolved settings, enough to regenerate it.

use std::path::PathBuf;

use fmp_core::{Error as CoreError, Regime};

pub mod args;
mod commands;
pub mod output;
pub mod settings;

pub use args::{Cli, Command};
pub use settings::Settings;

/// Errors that abort a command. All of them exit with status 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    /// Diagnostic for commands tied to one side of `H = 1/2`.
    pub(crate) fn regime(command: &str, found: Regime) -> CliError {
        let why = match command {
            "density" => {
                "Z_n converges to a limit Z with a smooth density only for 1/2 < H <= 1; \
                 for H <= 1/2 the normalised limit is Gaussian (see `fmp clt`)"
            }
            "fractal" => {
                "the limit process B, whose graph has dimension 2 - H, exists only for \
                 1/2 < H <= 1; below 1/2 B_n diverges and only its normalisation converges"
            }
            _ => "this check is stated for the other side of H = 1/2",
        };
        CliError::Usage(format!("`{command}` needs the convergent regime, got {}: {why}", found.name()))
    }

    pub fn exit_code(&self) -> u8 {
        2
    }
}

/// Whether every asserted threshold held.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
        }
    }
}

/// Resolves settings (defaults < config file < flags) and runs the command.
pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    let file = match &cli.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    let mut settings = file.overlay(cli.command.settings());
    if cli.out_dir.is_some() {
        settings.out_dir = cli.out_dir.clone();
    }
    let out_dir = settings.resolve_out_dir();
    std::fs::create_dir_all(&out_dir).map_err(CliError::io(&out_dir))?;
    commands::dispatch(cli.command.name(), settings, &out_dir)
}
