//! `stdpp`: batch front end for validating, simulating, summarizing and
//! fitting space-time DPP models.
//!
//! Every run is described by one JSON config document; `--set key=value`
//! overrides any field by its dotted path. Exit status is 0 on success, 1
//! when the answer is negative (invalid model, failed fit in strict mode, a
//! numerical failure) and 2 for usage, config or input-parse errors.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::Outcome;
use config::{Command, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "stdpp", version = stdpp::VERSION, about = "Space-time determinantal point processes")]
struct Cli {
    #[arg(value_enum)]
    command: Command,

    /// JSON run configuration.
    #[arg(short, long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override a config field by dotted key; the value is parsed as JSON when possible.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Same as `--set output_path=DIR`.
    #[arg(short, long, value_name = "DIR")]
    output: Option<PathBuf>,

    /// Same as `--set strict=true`.
    #[arg(long)]
    strict: bool,
}

const EXIT_REJECTED: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn init_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("STDPP_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| anyhow::anyhow!("STDPP_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn is_parse_error(err: &anyhow::Error) -> bool {
    err.chain()
        .any(|e| matches!(e.downcast_ref::<stdpp::Error>(), Some(stdpp::Error::Parse { .. })))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    let mut overrides = cli.overrides.clone();
    if let Some(dir) = &cli.output {
        overrides.push(format!(
            "output_path={}",
            serde_json::Value::from(dir.display().to_string())
        ));
    }
    if cli.strict {
        overrides.push("strict=true".into());
    }
    let config = match init_threads().and_then(|_| RunConfig::load(cli.config.as_deref(), &overrides, cli.command)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };

    let result = match cli.command {
        Command::Validate => commands::run_validate(&config),
        Command::Curves => commands::run_curves(&config),
        Command::Simulate => commands::run_simulate(&config),
        Command::Summarize => commands::run_summarize(&config),
        Command::Fit => commands::run_fit(&config),
    };
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Rejected) => ExitCode::from(EXIT_REJECTED),
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_parse_error(&e) {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_REJECTED)
            }
        }
    }
}
