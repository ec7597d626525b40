use std::process::ExitCode;

use clap::Parser;
use iob_cli::args::Cli;

fn main() -> ExitCode {
    match iob_cli::run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
