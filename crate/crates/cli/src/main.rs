mod args;
mod commands;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;
use ensemble_grover::montecarlo::thread_cap_from_env;

use crate::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match thread_cap_from_env() {
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("warning: could not size thread pool: {e}");
            }
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
