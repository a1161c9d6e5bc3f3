use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MTV_LOG", "warn")).init();
    let argv: Vec<String> = std::env::args().collect();
    let cli = mtv::cli::Cli::parse();
    match mtv::cli::run(cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mtv: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
