//! `hslab` command-line front end.
//!
//! Exit codes: 0 success, 2 validation, 3 non-convergence or numerical
//! failure, 4 I/O. Errors go to stderr as one JSON line.

// NaN-rejecting checks read as `!(x > 0.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod config;
mod report;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Numerical(_) => "numerical",
            CliError::Io(_) => "io",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }

    fn emit(&self) {
        let line = serde_json::json!({ "error": self.kind(), "code": self.code(), "message": self.message() });
        eprintln!("{line}");
    }
}

impl From<hslab_core::Error> for CliError {
    fn from(e: hslab_core::Error) -> Self {
        use hslab_core::Error as E;
        match e {
            E::NotConverged { .. } | E::ShootingFailed { .. } => CliError::Numerical(e.to_string()),
            E::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn init_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("HSLAB_WORKERS") else {
        return Ok(());
    };
    let workers: usize = raw.trim().parse().ok().filter(|w| *w > 0).ok_or_else(|| {
        CliError::Validation(format!(
            "HSLAB_WORKERS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| CliError::Validation(format!("worker pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            CliError::Validation(first.to_string()).emit();
            return ExitCode::from(2);
        }
    };
    let result = init_workers().and_then(|_| commands::run(&cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            e.emit();
            ExitCode::from(e.code())
        }
    }
}
