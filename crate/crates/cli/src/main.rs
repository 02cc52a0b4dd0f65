use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use pickands::parallel::{install, threads_from_env};
use pickands_cli::{run, Command};

/// Monte Carlo estimation of Pickands constants and related quantities.
/// Worker count comes from PICKANDS_THREADS; results do not depend on it.
#[derive(Parser, Debug)]
#[command(name = "pickands", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match install(threads_from_env(), || run(cli.command)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    for note in &outcome.notes {
        eprintln!("{note}");
    }
    let written = match &outcome.out {
        Some(path) => std::fs::write(path, &outcome.output),
        None => std::io::stdout().write_all(outcome.output.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: writing output: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(outcome.code as u8)
}
