use std::process::ExitCode;

use clap::Parser;
use nch_cli::{run, Cli, EXIT_CONFIG};

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
