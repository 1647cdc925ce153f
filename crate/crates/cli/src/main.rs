use std::process::ExitCode;

use clap::Parser;
use gkp_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("gkp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
