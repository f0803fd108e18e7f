//! Command-line runner: experiments, figure presets and the acceptance self-test.

use std::ffi::OsString;
use std::fmt;

use clap::{CommandFactory, Parser};

pub mod args;
pub mod commands;
pub mod io;
pub mod presets;
pub mod selftest;

use args::{Cli, Command};

/// Bad input from the user; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Parse `argv`, run the subcommand and return the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() && !e.to_string().contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return e.exit_code();
        }
    };
    let words: Vec<String> = argv.iter().map(|s| s.to_string_lossy().into_owned()).collect();
    let result = match &cli.command {
        Command::Simulate(a) => commands::simulate(a, words),
        Command::Predict(a) => commands::predict(a, words),
        Command::GrokTime(a) => commands::grok_time_cmd(a, words),
        Command::PhaseDiagram(a) => commands::phase_diagram(a, words),
        Command::Figure(a) => presets::figure(a, words),
        Command::Selftest(a) => return selftest::run_cli(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = exit_code(&e);
            if code == 2 {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            code
        }
    }
}

fn exit_code(e: &anyhow::Error) -> i32 {
    if e.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match e.downcast_ref::<grokklab_core::Error>() {
        Some(grokklab_core::Error::InvalidParameter(_)) => 2,
        _ => 1,
    }
}
