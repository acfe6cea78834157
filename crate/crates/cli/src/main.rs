//! `contangle`: command-line access to residual-contangle computations.
//!
//! Exit codes: 0 success, 2 domain/usage error, 3 numerical error,
//! 4 resource error. Diagnostics go to standard error as a single line.

mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;
use contangle_core::Error;

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io(String),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::Domain(_)) | CliError::Io(_) | CliError::Usage(_) => 2,
            CliError::Core(Error::Numerical(_)) => 3,
            CliError::Core(Error::Resource(_)) => 4,
        }
    }

    fn line(&self) -> String {
        let msg = match self {
            CliError::Core(e) => e.to_string(),
            CliError::Io(m) => format!("io error: {m}"),
            CliError::Usage(m) => format!("usage error: {m}"),
        };
        format!("error: {}", msg.replace('\n', " "))
    }
}

fn main() -> ExitCode {
    let cli = match commands::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.exit_code())
        }
    }
}
