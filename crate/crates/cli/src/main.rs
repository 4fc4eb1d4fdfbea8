use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod error;
mod output;

use args::{Cli, Command};
use error::CliError;

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Capacity(a) => commands::cmd_capacity(&a),
        Command::Exponent(a) => commands::cmd_exponent(&a),
        Command::Sweep(a) => {
            if commands::cmd_sweep(&a)? {
                Ok(())
            } else {
                Err(CliError::Io("some sweep points failed; see the error column".into()))
            }
        }
        Command::Region(a) => commands::cmd_region(&a),
        Command::Simulate(a) => commands::cmd_simulate(&a),
        Command::Verify(a) => {
            if commands::cmd_verify(&a)? {
                Ok(())
            } else {
                Err(CliError::Assertion("verification failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("amac: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
