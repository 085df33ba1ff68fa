//! Command-line front end for `attrest`: argument definitions, subcommand
//! implementations and the shared report envelope.

pub mod args;
pub mod commands;
pub mod error;
pub mod report;

use std::io::Write;

use args::{Cli, Command};
use commands::Outcome;
use error::CliError;

/// Runs one parsed command and returns its rendered report.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Analyze(a) => commands::analyze(a),
        Command::Optimize(a) => commands::optimize(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Enumerate(a) => commands::enumerate(a),
        Command::Verify(a) => commands::verify(a),
        Command::Synth(a) => commands::synth(a),
    }
}

/// Runs a command, writes its report to the destination (or `stdout`) and
/// errors to `stderr`, and returns the process exit status.
pub fn execute(cli: &Cli, stdout: &mut impl Write, stderr: &mut impl Write) -> u8 {
    let outcome = match run(cli) {
        Ok(outcome) => outcome,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return e.exit_code();
        }
    };
    let written = match &outcome.destination {
        Some(path) => std::fs::write(path, &outcome.report).map_err(|e| CliError::io(path, e)),
        None => stdout
            .write_all(outcome.report.as_bytes())
            .map_err(|e| CliError::Usage(format!("writing report: {e}"))),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return e.exit_code();
    }
    outcome.exit_code
}
