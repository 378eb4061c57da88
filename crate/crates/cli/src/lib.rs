//! Command-line front end for the adaptive FMM: θ sweeps, tuned
//! simulations, cost-cap sweeps and a controller lab over synthetic
//! runtime landscapes. Every command writes CSV files into `--out`.

pub mod args;
pub mod clock;
pub mod commands;
pub mod config;
pub mod driver;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

pub use args::{Cli, Command};
pub use error::{CliError, Result};

/// Hash of the resolved configuration, ignoring the output directory.
pub fn command_hash(cmd: &Command) -> String {
    let mut c = cmd.clone();
    let common = match &mut c {
        Command::Sweep(a) => &mut a.common,
        Command::Simulate(a) => &mut a.common,
        Command::Capsweep(a) => &mut a.common,
        Command::Lab(a) => &mut a.common,
    };
    common.out = PathBuf::new();
    common.config = None;
    output::config_hash(&format!("{c:?}"))
}

/// Run a parsed command; returns the text summary for stdout.
pub fn execute(cli: &Cli) -> Result<String> {
    let hash = command_hash(&cli.command);
    match &cli.command {
        Command::Sweep(a) => commands::sweep::run(a, &hash),
        Command::Simulate(a) => commands::simulate::run(a, &hash),
        Command::Capsweep(a) => commands::capsweep::run(a, &hash),
        Command::Lab(a) => commands::lab::run(a, &hash),
    }
}

/// Full program: parse `argv` (config file included), run, print, and
/// return the process exit code.
pub fn main_with_args(argv: Vec<OsString>) -> i32 {
    let argv = match config::expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
