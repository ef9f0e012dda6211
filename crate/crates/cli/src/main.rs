//! `qadv`: command-line driver for the propagation, detection, sampling,
//! sensing and Bell experiments.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or config error,
//! 3 runtime invariant violation, 4 resource limit exceeded.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use config::*;
use output::Run;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] qadv_core::Error),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use qadv_core::Error as E;
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Core(e) => match e {
                E::DenseLimit { .. } | E::TooManyQubits { .. } => 4,
                E::Invariant(_) => 3,
                _ => 2,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qadv", version, about = "Low-weight Pauli propagation and advantage-detection experiments")]
struct Cli {
    /// TOML config file, or a manifest.json from an earlier run to replay it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "QADV_OUT_DIR", default_value = "qadv-out")]
    out: PathBuf,
    /// Worker threads for trial-parallel work (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Weight-1 Frobenius decay of Z₁ through random brickwork layers.
    Decay(DecayFlags),
    /// Compare exact and heuristic ⟨Z₁⟩ on sampled inputs.
    Detect(DetectFlags),
    /// Classify a batch of labelled C_new instances.
    Suite(SuiteFlags),
    /// Sample-and-query access: build, sample or estimate.
    Dequant(DequantFlags),
    /// Run one sensing protocol configuration.
    Sense(SenseFlags),
    /// Success-probability table over a sensing parameter grid.
    Sweep(SweepFlags),
    /// CHSH strategies, quantum correlators and the socks game.
    Bell(BellFlags),
    /// Heuristic with k = n against the statevector on random circuits.
    OracleCheck(OracleFlags),
}

fn execute<C, F>(
    name: &str,
    file: Option<&serde_json::Value>,
    flags: &F,
    out: &PathBuf,
    seed_of: impl Fn(&C) -> u64,
    body: impl FnOnce(&C, &mut Run) -> Result<(), CliError>,
) -> Result<(), CliError>
where
    C: serde::de::DeserializeOwned + Serialize,
    F: Serialize,
{
    let cfg: C = resolve(name, file, flags)?;
    let start = Instant::now();
    let mut run = Run::new(out, name, &cfg, seed_of(&cfg))?;
    body(&cfg, &mut run)?;
    let manifest = run.finish(start.elapsed())?;
    eprintln!("wrote {}", manifest.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    }
    let file = cli.config.as_deref().map(load_file).transpose()?;
    let file = file.as_ref();
    let out = &cli.out;
    match &cli.command {
        Command::Decay(f) => execute("decay", file, f, out, |c: &DecayConfig| c.seed, commands::decay),
        Command::Detect(f) => execute("detect", file, f, out, |c: &DetectConfig| c.seed, commands::detect),
        Command::Suite(f) => execute("suite", file, f, out, |c: &SuiteConfig| c.seed, commands::suite),
        Command::Dequant(f) => execute("dequant", file, f, out, |c: &DequantConfig| c.seed, commands::dequant),
        Command::Sense(f) => execute("sense", file, f, out, |c: &SenseConfig| c.seed, commands::sense),
        Command::Sweep(f) => execute("sweep", file, f, out, |c: &SweepConfig| c.seed, commands::sweep),
        Command::Bell(f) => execute("bell", file, f, out, |c: &BellConfig| c.seed, commands::bell),
        Command::OracleCheck(f) => {
            execute("oracle-check", file, f, out, |c: &OracleConfig| c.seed, commands::oracle_check)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
