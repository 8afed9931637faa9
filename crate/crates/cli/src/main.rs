mod commands;
mod config;
mod report;

use clap::Parser;
use commands::CliError;
use config::{Cli, Format, RunConfig};
use std::process::ExitCode;

const VERIFIED: u8 = 0;
const RESIDUAL: u8 = 1;
const USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { VERIFIED });
        }
    };
    let cfg = match RunConfig::resolve(cli) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(USAGE);
        }
    };
    let outcome = match commands::run(&cfg) {
        Ok(o) => o,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(USAGE);
        }
        Err(CliError::Engine(e)) => {
            eprintln!("pipeline failure: {e}");
            return ExitCode::from(RESIDUAL);
        }
    };
    let text = match cfg.format {
        Format::Json => report::to_json(&outcome.report),
        Format::Latex => report::to_latex(&outcome.report),
    };
    match &cfg.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: writing {}: {e}", path.display());
                return ExitCode::from(USAGE);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(if outcome.verified { VERIFIED } else { RESIDUAL })
}
