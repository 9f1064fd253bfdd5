//! `qcorr`: classify channels, search for creation witnesses, verify
//! singlet-fraction bounds and run channel censuses.

mod commands;
mod io;
mod report;
mod selftest;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{ConfigEcho, Report};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] qcorr::Error),
}

/// Exit statuses.
pub mod exit {
    pub const OK: u8 = 0;
    pub const FAILURE: u8 = 1;
    pub const INVALID_INPUT: u8 = 2;
    pub const NOT_FOUND: u8 = 3;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "qcorr", version, about = "Quantum-correlation creation by local channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    opts: Options,
}

#[derive(Clone, Debug, Args)]
pub struct Options {
    /// Hilbert-space dimension for generated channels, states and scans.
    #[arg(long, global = true)]
    pub dim: Option<usize>,

    /// Master seed; a time-derived seed is used and echoed when omitted.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Decision threshold on normalized commutators.
    #[arg(long, global = true, default_value_t = 1e-7)]
    pub tol: f64,

    /// Objective evaluations per search.
    #[arg(long, global = true, default_value_t = 20_000)]
    pub budget: usize,

    /// Number of sampled channels or states.
    #[arg(long, global = true, default_value_t = 200)]
    pub samples: usize,

    /// Input channel file (classify, witness) or state file (msf).
    #[arg(long = "in", global = true)]
    pub input: Option<PathBuf>,

    /// Channel file applied to the state in `msf`.
    #[arg(long, global = true)]
    pub channel: Option<PathBuf>,

    /// Write the report or generated file here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Reject non-unital channels in `msf`.
    #[arg(long, global = true)]
    pub require_mixing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Label a channel and attach evidence.
    Classify,
    /// Search for a half-classical input whose output is not classical.
    Witness,
    /// Maximum singlet fraction of a state, optionally before and after a channel on B.
    Msf,
    /// Sample channels from every family and compare detectors with the commutativity search.
    Scan,
    /// Run built-in consistency checks.
    Selftest,
    /// Write a channel file.
    MakeChannel(commands::MakeChannel),
    /// Write a state file.
    MakeState(commands::MakeState),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Witness => "witness",
            Command::Msf => "msf",
            Command::Scan => "scan",
            Command::Selftest => "selftest",
            Command::MakeChannel(_) => "make-channel",
            Command::MakeState(_) => "make-state",
        }
    }
}

/// Result of a command: a report and the exit status it implies.
pub struct Outcome {
    pub result: serde_json::Value,
    pub summary: Vec<String>,
    pub status: u8,
}

fn configure_threads() {
    if let Some(n) = std::env::var("QCORR_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn validate(opts: &Options) -> Result<(), CliError> {
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(CliError::Input(format!("--tol must be positive, got {}", opts.tol)));
    }
    if opts.budget == 0 {
        return Err(CliError::Input("--budget must be positive".into()));
    }
    if opts.dim == Some(0) {
        return Err(CliError::Input("--dim must be positive".into()));
    }
    Ok(())
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    validate(&cli.opts)?;
    let seed = cli.opts.seed.unwrap_or_else(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0)
    });
    let opts = &cli.opts;

    // Generators write files, not reports.
    match &cli.command {
        Command::MakeChannel(args) => {
            let text = commands::make_channel(args, opts, seed)?;
            emit(&text, opts.out.as_ref())?;
            return Ok(exit::OK);
        }
        Command::MakeState(args) => {
            let text = commands::make_state(args, opts, seed)?;
            emit(&text, opts.out.as_ref())?;
            return Ok(exit::OK);
        }
        _ => {}
    }

    let start = std::time::Instant::now();
    let outcome = match &cli.command {
        Command::Classify => commands::classify(opts, seed)?,
        Command::Witness => commands::witness(opts, seed)?,
        Command::Msf => commands::msf(opts, seed)?,
        Command::Scan => commands::scan(opts, seed)?,
        Command::Selftest => selftest::run(opts, seed),
        Command::MakeChannel(_) | Command::MakeState(_) => unreachable!("handled above"),
    };
    let config = ConfigEcho {
        command: cli.command.name().to_string(),
        dim: opts.dim,
        seed,
        tol: opts.tol,
        budget: opts.budget,
        samples: opts.samples,
        input: opts.input.as_ref().map(|p| p.display().to_string()),
        channel: opts.channel.as_ref().map(|p| p.display().to_string()),
        require_mixing: opts.require_mixing,
    };
    let report = Report::new(config, outcome.result, outcome.summary, start.elapsed().as_secs_f64());
    let text = match opts.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    emit(&text, opts.out.as_ref())?;
    Ok(outcome.status)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::INVALID_INPUT } else { exit::OK });
        }
    };
    configure_threads();
    match run(cli) {
        Ok(status) => ExitCode::from(status),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit::INVALID_INPUT)
        }
    }
}
