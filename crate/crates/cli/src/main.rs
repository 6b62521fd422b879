//! `errfloor` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 runtime diagnostic.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<errfloor::Error> for CliError {
    fn from(e: errfloor::Error) -> Self {
        use errfloor::Error as E;
        match e {
            E::InvalidParameter(_) | E::EmptySelection(_) => CliError::Usage(e.to_string()),
            E::WeightOverflow { .. } | E::NoErrorEvent => CliError::Runtime(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "errfloor", version, about = "LDPC error-floor toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Print code dimensions, degree profiles and girth.
    Info { code: PathBuf },
    /// Search for dominant error events with deterministic impulses.
    Search(SearchArgs),
    /// Probe the error boundary of every catalog entry and rank classes.
    Boundary(BoundaryArgs),
    /// Monte Carlo or importance-sampling error-rate sweep.
    Simulate(SimulateArgs),
    /// Merge result files of a directory into one curve file.
    Report(ReportArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Flat key = value config file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Parity-check matrix in alist format.
    #[arg(long)]
    pub code: Option<PathBuf>,
    /// bp or min-sum.
    #[arg(long)]
    pub algorithm: Option<String>,
    /// Maximum decoder iterations.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Message magnitude clamp.
    #[arg(long)]
    pub clamp: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct ProbeArgs {
    #[arg(long)]
    pub lmin: Option<f64>,
    #[arg(long)]
    pub lmax: Option<f64>,
    /// Bisection steps.
    #[arg(long)]
    pub p: Option<u32>,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub epsilon1: Option<f64>,
    /// Tier-two impulse; omit to leave those bits at gamma.
    #[arg(long)]
    pub epsilon2: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Per-degree gamma, e.g. 2:0.3,3:0.3,6:0.4,8:0.45.
    #[arg(long)]
    pub gamma_by_degree: Option<String>,
    /// Branches receiving an impulse (default: all).
    #[arg(long)]
    pub vnum: Option<usize>,
    /// Impulse tree depth, 1 or 2.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Number of smallest variable-degree classes used as roots (0 = all).
    #[arg(long)]
    pub degree_cutoff: Option<usize>,
    /// Search Eb/N0 in dB.
    #[arg(long)]
    pub ebno: Option<f64>,
    /// Catalog output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BoundaryArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub probe: ProbeArgs,
    /// Catalog written by `search`.
    #[arg(long)]
    pub catalog: PathBuf,
    /// Probe Eb/N0 in dB.
    #[arg(long)]
    pub ebno: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub probe: ProbeArgs,
    /// mc or is.
    #[arg(long)]
    pub mode: String,
    /// Comma-separated Eb/N0 list in dB.
    #[arg(long)]
    pub snrs: Option<String>,
    /// MC: frames per SNR. IS: frames per shift point (P).
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Catalog of candidate shift points (IS).
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Select events with d2 below this value.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Select the M nearest events.
    #[arg(long)]
    pub cap: Option<usize>,
    /// Shift magnitude s.
    #[arg(long)]
    pub shift: Option<f64>,
    /// Weight stabiliser (default n/2).
    #[arg(long)]
    pub psi: Option<f64>,
    /// Eb/N0 for boundary probing (default: first SNR).
    #[arg(long)]
    pub probe_ebno: Option<f64>,
    /// Add newly found close events as centres and rerun once.
    #[arg(long)]
    pub adapt: bool,
    /// Write every errored trial's weight.
    #[arg(long)]
    pub log_weights: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Directory holding results_*.csv files.
    pub dir: PathBuf,
    /// Multiplicity A of the proxy term A·Q(√(2w Es/N0)).
    #[arg(long)]
    pub proxy_mult: Option<f64>,
    /// Distance w of the proxy term.
    #[arg(long)]
    pub proxy_weight: Option<f64>,
    /// Output file (default: <dir>/merged.csv).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.cmd {
        Cmd::Info { code } => commands::info(&code),
        Cmd::Search(a) => commands::search(&a),
        Cmd::Boundary(a) => commands::boundary(&a),
        Cmd::Simulate(a) => commands::simulate(&a),
        Cmd::Report(a) => commands::report(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
