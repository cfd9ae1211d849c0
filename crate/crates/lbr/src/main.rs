use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = lbr::cli::Cli::parse();
    let mut out = std::io::stdout().lock();
    match lbr::cli::run(cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
