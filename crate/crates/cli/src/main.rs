//! `csi-prism` command-line front end.

mod analyze;
mod config;
mod inspect;
mod synth;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Environment variable that overrides the configured output directory.
pub const OUT_ENV: &str = "CSI_PRISM_OUT";
pub const DEFAULT_OUT: &str = "csi-prism-out";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "csi-prism", version, about = "Massive-MIMO to UAV channel characterization")]
struct Cli {
    /// Log progress (repeat for debug output).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute every channel metric and write CSV reports plus a manifest.
    Analyze(AnalyzeArgs),
    /// Generate synthetic CSI (and flight logs) from key=value specs.
    Synth(SynthArgs),
    /// Print the header of a CSIT file.
    Inspect {
        path: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// key=value run configuration.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// CSIT recording; repeat for several flights.
    #[arg(long)]
    csi: Vec<PathBuf>,
    /// Flight log matching each --csi, in the same order.
    #[arg(long)]
    trajectory: Vec<PathBuf>,
    /// Output directory (beats CSI_PRISM_OUT and the config file).
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// PDP averaging window W, snapshots.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
    /// Noise gate below each PDP peak, dB.
    #[arg(long)]
    gate_db: Option<f64>,
    /// Spectral divergence threshold.
    #[arg(long)]
    c_th: Option<f64>,
    /// `tail` or `fixed:<linear power>`.
    #[arg(long)]
    noise: Option<String>,
    /// SE snapshot spacing.
    #[arg(long)]
    decimation: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Any config key, `key=value`; repeatable, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// key=value synthesis specs; each produces `<stem>.csit` and `<stem>.meta`.
    #[arg(required = true)]
    specs: Vec<PathBuf>,
    /// Output directory (beats CSI_PRISM_OUT).
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Spec override `key=value`, applied to every spec; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] csi_prism::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_input_error() => 2,
            _ => 1,
        }
    }
}

pub fn init_threads(threads: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    Ok(())
}

/// `--out`, then the environment, then the fallback.
pub fn resolve_out(flag: Option<PathBuf>, fallback: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .or(fallback)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(args) => analyze::run(args),
        Command::Synth(args) => {
            init_threads(args.threads)?;
            synth::run(args)
        }
        Command::Inspect { path } => inspect::run(&path),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
