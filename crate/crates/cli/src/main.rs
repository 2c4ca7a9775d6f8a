use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use eddeg::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(outcome) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(outcome.stdout.as_bytes()).is_err() {
                return ExitCode::from(eddeg::error::EXIT_INTERNAL);
            }
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("eddeg: {e}");
            ExitCode::from(e.code)
        }
    }
}
