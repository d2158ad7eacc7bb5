use std::process::ExitCode;

use clap::Parser;
use lstfill_cli::error::Outcome;
use lstfill_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = run(&cli);
    if let Err(e) = &result {
        eprintln!("error: {e}");
    }
    ExitCode::from(Outcome::exit_code(&result))
}
