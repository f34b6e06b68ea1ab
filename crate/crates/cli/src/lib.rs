//! Command-line front end: fixed-rate tables, moment reports, oracle
//! verification and the identity suite.
//!
//! Exit codes: 0 success, 1 verification or identity failure, 2 invalid
//! input, 3 numerical failure.

pub mod args;
pub mod commands;
pub mod error;
pub mod render;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

use crate::args::{Cli, Command, OutputArgs};
use crate::error::{EXIT_FAILED, EXIT_INVALID};

fn output_args(command: &Command) -> &OutputArgs {
    match command {
        Command::Fixed(a) => &a.output,
        Command::Moments(a) => &a.output,
        Command::Verify(a) => &a.output,
        Command::Identities(a) => &a.output,
    }
}

fn execute(command: &Command) -> error::Result<commands::Outcome> {
    match command {
        Command::Fixed(a) => commands::cmd_fixed(a),
        Command::Moments(a) => commands::cmd_moments(a),
        Command::Verify(a) => commands::cmd_verify(a),
        Command::Identities(a) => commands::cmd_identities(a),
    }
}

fn emit(output: &OutputArgs, text: &str) -> error::Result<()> {
    match &output.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run(args: Vec<OsString>) -> i32 {
    let args = match args::expand_config(args) {
        Ok(args) => args,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = execute(&cli.command).and_then(|outcome| {
        emit(output_args(&cli.command), &outcome.text)?;
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            if let Some(note) = &outcome.note {
                eprintln!("{note}");
            }
            if outcome.passed {
                0
            } else {
                EXIT_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
