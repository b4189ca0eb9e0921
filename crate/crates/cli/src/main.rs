mod bounds;
mod config;
mod optimize;
mod output;
mod simulate;
mod sweep;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Bell's original inequality versus CHSH: bounds, quantum optimization,
/// exhaustive hidden-variable checks and Monte Carlo tests.
#[derive(Debug, Parser)]
#[command(name = "ob-bell", version)]
struct Cli {
    /// Master seed (overrides the config seed where one applies).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Directory for result files. Nothing is written without it.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads, 0 for one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classical and quantum bounds, thresholds and the feasibility law.
    Bounds(bounds::Args),
    /// Numerically maximize the quantum statistic.
    Optimize(optimize::Args),
    /// Exhaustive hidden-variable oracles against the classical bounds.
    Verify(verify::Args),
    /// Run one Monte Carlo experiment from a config file.
    Simulate(simulate::Args),
    /// Feasibility grid over (gamma, eta), optionally with simulations.
    Sweep(sweep::Args),
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        2
    }
}

/// What a subcommand produced. `failure` is set when a checked property
/// did not hold; the report is still printed and written.
pub struct Report {
    pub text: String,
    pub json: serde_json::Value,
    pub files: Vec<(String, String)>,
    pub failure: Option<String>,
}

impl Report {
    pub fn new(text: String, json: serde_json::Value) -> Self {
        Report {
            text,
            json,
            files: Vec::new(),
            failure: None,
        }
    }
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Bounds(args) => bounds::run(args),
        Command::Optimize(args) => optimize::run(args),
        Command::Verify(args) => verify::run(args, cli.seed.unwrap_or(0)),
        Command::Simulate(args) => simulate::run(args, cli.seed),
        Command::Sweep(args) => sweep::run(args, cli.seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
    {
        eprintln!("error: thread pool: {e}");
        return ExitCode::from(2);
    }
    let report = match run(&cli) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    if let Some(dir) = &cli.out {
        for (name, contents) in &report.files {
            if let Err(e) = output::write_atomic(dir, name, contents) {
                eprintln!("error: {e}");
                return ExitCode::from(e.exit_code());
            }
        }
    }
    if cli.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report.json).expect("report serializes")
        );
    } else {
        print!("{}", report.text);
    }
    match report.failure {
        None => ExitCode::SUCCESS,
        Some(message) => {
            eprintln!("check failed: {message}");
            ExitCode::from(1)
        }
    }
}
