use std::process::ExitCode;

use clap::Parser;
use fmp_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("fmp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
