//! `commlab`: seeded batch experiments over the protocol library.
//!
//! Every record is one JSON object per line (or a CSV row) carrying the
//! command, its configuration, the seed and the build id, so any line can be
//! replayed.

mod commands;
mod output;

use clap::{Parser, Subcommand, ValueEnum};
use commlab::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "commlab", version, about = "Communication-protocol laboratory")]
pub struct Cli {
    /// Master seed.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Monte Carlo trials.
    #[arg(long, global = true, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write records here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Add wall-clock time to every record (breaks byte-for-byte replay).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the quick self-check suite; exits 1 if any check fails.
    Verify,
    /// Sum-Equal and Equality protocols and samplers.
    #[command(subcommand)]
    Sumequal(commands::SumEqualCmd),
    /// Streaming and k-player simulations, amplification.
    #[command(subcommand)]
    Simulate(commands::SimulateCmd),
    /// Gap reduction and bias reports.
    #[command(subcommand)]
    Ghse(commands::GhseCmd),
    /// Strict turnstile streams and L0 estimation.
    #[command(subcommand)]
    L0(commands::L0Cmd),
    /// Numeric oracles.
    #[command(subcommand)]
    Probe(commands::ProbeCmd),
}

fn enum_cap() -> Result<u64, Error> {
    match std::env::var("COMMLAB_ENUM_CAP") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("COMMLAB_ENUM_CAP = {v:?} is not an integer"))),
        Err(_) => Ok(commlab::function::DEFAULT_ENUM_CAP),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = enum_cap().and_then(|cap| {
        let ctx = commands::Context {
            seed: cli.seed,
            trials: cli.trials,
            enum_cap: cap,
            timing: cli.timing,
        };
        let (records, healthy) = commands::run(&cli.command, &ctx)?;
        output::write(&records, cli.format, cli.out.as_deref())?;
        Ok(healthy)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let reason = serde_json::json!({"error": e.kind(), "reason": e.to_string()});
            eprintln!("{reason}");
            ExitCode::from(match e {
                Error::Refused(_) => 3,
                Error::Config(_)
                | Error::Parameter(_)
                | Error::Parse(_)
                | Error::Precondition(_)
                | Error::StrictViolation { .. } => 2,
                _ => 1,
            })
        }
    }
}
