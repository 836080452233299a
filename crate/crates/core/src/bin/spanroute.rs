use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use spanroute::run::{self, RunOptions};
use spanroute::scenario::parse_scenario;

/// Simulate shortest-path routing policies described by a scenario file.
#[derive(Debug, Parser)]
#[command(name = "spanroute", version)]
struct Args {
    /// Scenario file.
    #[arg(long)]
    scenario: PathBuf,
    /// Parse, resolve and print the configuration without simulating.
    #[arg(long)]
    validate_only: bool,
    /// Worker threads for replications (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Comma-separated checkpoint slots replacing the log-spaced default.
    #[arg(long)]
    checkpoints: Option<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("spanroute: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn execute(args: &Args) -> Result<(), String> {
    let scenario = parse_scenario(&args.scenario).map_err(|e| e.to_string())?;
    if args.validate_only {
        let text = run::validate_only(&scenario).map_err(|e| e.to_string())?;
        print!("{text}");
        return Ok(());
    }
    let checkpoints = args
        .checkpoints
        .as_deref()
        .map(run::parse_checkpoints)
        .transpose()
        .map_err(|e| e.to_string())?;
    let options = RunOptions {
        jobs: args.jobs,
        checkpoints,
    };
    let written = run::run_command(&scenario, &options).map_err(|e| e.to_string())?;
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}
