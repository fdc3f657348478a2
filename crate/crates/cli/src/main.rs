use std::process::ExitCode;

use clap::Parser;
use udncov_cli::app::{execute, Cli, Status};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mut out, mut err) = (std::io::stdout().lock(), std::io::stderr());
    match execute(&cli, &mut out, &mut err) {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::Failures) => ExitCode::from(1),
        Err(e) => {
            eprintln!("udncov: {e}");
            ExitCode::from(2)
        }
    }
}
