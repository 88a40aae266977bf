//! Command-line front end for `portionforge-core`.
//!
//! Profiles are read from JSON files ([`files::ProfileFile`]); every
//! command writes JSON (or JSON lines) to stdout or to `--out`.
//!
//! Exit codes: 0 success or pass, 1 a verdict failed (or a solver gave
//! up), 2 malformed input or flags, 3 a mechanism that does not apply to
//! the input.

use std::io::Write;

pub mod args;
pub mod commands;
pub mod encode;
pub mod files;
pub mod parallel;

use clap::Parser;
use portionforge_core::Error as CoreError;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INCOMPATIBLE: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Incompatible(String),
    #[error("{0}")]
    Runtime(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => EXIT_USAGE,
            CliError::Incompatible(_) => EXIT_INCOMPATIBLE,
            CliError::Runtime(_) => EXIT_FAIL,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Incompatible { .. } | CoreError::NoScalarUtility(_) => {
                CliError::Incompatible(e.to_string())
            }
            CoreError::NotConverged(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Parses `argv` (program name first), runs the command and returns the
/// exit code. Diagnostics go to `err`.
pub fn run<S: AsRef<str>>(argv: &[S], out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let argv: Vec<String> = argv.iter().map(|s| s.as_ref().to_string()).collect();
    let cli = match args::Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match commands::dispatch(cli, &argv[1..], out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
