mod args;
mod commands;
mod config;
mod error;

use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};
use serde_json::Map;

use crate::args::{Cli, Command, Counterexample};
use crate::error::CliError;

fn run() -> Result<(), CliError> {
    let matches = Cli::command().get_matches();
    let cli = Cli::from_arg_matches(&matches).unwrap_or_else(|e| e.exit());
    let config = match &cli.config {
        Some(path) => config::load(path)?,
        None => Map::new(),
    };
    let (_, sub) = matches.subcommand().expect("subcommand is required");
    match cli.command {
        Command::Simulate(a) => commands::cmd_simulate(config::merge(a, sub, &config)?),
        Command::Verify(a) => commands::cmd_verify(config::merge(a, sub, &config)?),
        Command::Regret(a) => commands::cmd_regret(config::merge(a, sub, &config)?),
        Command::Sweep(a) => commands::cmd_sweep(config::merge(a, sub, &config)?),
        Command::Counterexample { which } => {
            let (_, leaf) = sub.subcommand().expect("counterexample needs a subcommand");
            match which {
                Counterexample::Wright(a) => commands::cmd_wright(config::merge(a, leaf, &config)?),
                Counterexample::Convergence(a) => commands::cmd_convergence(config::merge(a, leaf, &config)?),
            }
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
