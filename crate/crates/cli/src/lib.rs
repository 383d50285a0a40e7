//! The `teleclone` command line.
//!
//! Exit codes: 0 on success, 1 when a check fails (invariants after a build,
//! or a Monte Carlo z-score above 5), 2 on invalid arguments.

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

pub mod args;
pub mod commands;
pub mod format;

use args::{Cli, Command};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Io(std::io::Error),
}

/// Parses `argv` (program name first), runs the command and returns the exit
/// code. Documents go to `out` unless `--output` names a file.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let (result, path) = match &cli.command {
        Command::Simulate(a) => (commands::simulate(&a.protocol), a.output.clone()),
        Command::Sweep(a) => (commands::sweep(a), a.output.clone()),
        Command::Verify(a) => (commands::verify(a), a.output.clone()),
        Command::Table(a) => (commands::table(), a.output.clone()),
    };
    let written = result.and_then(|doc| {
        match &path {
            Some(p) => std::fs::write(p, &doc.text),
            None => out.write_all(doc.text.as_bytes()),
        }
        .map_err(Failure::Io)?;
        Ok(doc.passed)
    });
    match written {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            let _ = writeln!(err, "teleclone: check failed, see the report");
            EXIT_CHECK_FAILED
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "teleclone: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(err, "teleclone: cannot write output: {e}");
            EXIT_CHECK_FAILED
        }
    }
}
