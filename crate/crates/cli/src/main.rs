//! `coxf`: build coding matrices, encode and decode coded linear transforms,
//! run the exact and Monte Carlo analyses, and simulate jobs in virtual time.

mod commands;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use coxf_core::analysis::{AnalysisError, AuditRecord, McReport};
use coxf_core::codes::CodeError;
use coxf_core::decoder::DecodeError;
use coxf_core::simulator::{GdTrace, JobTrace, SchemeSummary, SimError, TrialRecord};

use crate::spec::{CodeArgs, StragglerArgs};

#[derive(Debug, Parser)]
#[command(name = "coxf", version, about = "Coded distributed linear transforms: codes, decoders, analysis and simulation")]
pub struct Cli {
    /// Master seed for every randomized step [default: 0]
    #[arg(long, global = true, env = "COXF_SEED")]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a coding matrix and write it as JSON
    GenCode(GenCodeArgs),
    /// Split a data matrix into blocks and write each worker's coded block
    Encode(EncodeArgs),
    /// Recover y = Ax from n worker results
    Decode(DecodeArgs),
    /// Monte Carlo full-rank probability and load of a code family
    McRank(McRankArgs),
    /// Exhaustively check a code against the threshold and load lower bounds
    Audit(AuditArgs),
    /// Simulate one coded y = Ax job in virtual time
    Simulate(SimulateArgs),
    /// Coded gradient descent for least squares in virtual time
    Gd(GdArgs),
    /// Compare coding schemes over many straggler realisations
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct GenCodeArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    /// Redraw until every n×n submatrix is full rank (diagonal families)
    #[arg(long)]
    pub verify: bool,
    /// Redraw budget for --verify
    #[arg(long, default_value_t = 20)]
    pub max_trials: usize,
    /// Output file [default: stdout]
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Coding matrix JSON
    #[arg(long)]
    pub code: PathBuf,
    /// Data matrix (.mtx Matrix Market or .csv)
    #[arg(long)]
    pub matrix: PathBuf,
    /// Directory for worker_<i>.mtx files and manifest.json
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// Diagonal schedule for s-diagonal codes, hybrid otherwise
    Auto,
    Hybrid,
    Diagonal,
    Inverse,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Coding matrix JSON
    #[arg(long)]
    pub code: PathBuf,
    /// Worker result as WORKER=FILE (1-based worker, one value per line); give exactly n
    #[arg(long = "result", value_name = "WORKER=FILE", required = true)]
    pub results: Vec<String>,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    /// Rows of A before padding; trailing padding is dropped from the output
    #[arg(long)]
    pub source_rows: Option<usize>,
    /// Decoded y, one value per line [default: stdout]
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Write the decode report (method, steps, scalar ops, residual) as JSON
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct McRankArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Repeat for each of these n (comma separated); m follows --s, or keeps m − n of --n/--m
    #[arg(long, value_delimiter = ',')]
    pub sweep_n: Vec<usize>,
    /// Use p = 2 ln(n)/n for p-bernoulli (per n when sweeping)
    #[arg(long)]
    pub p_auto: bool,
    /// Keep one code (built from the seed) and resample only the subsets
    #[arg(long)]
    pub fixed_code: bool,
    /// Worker threads [default: all cores]; output does not depend on it
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Coding matrix JSON (alternative to the code flags)
    #[arg(long, visible_alias = "code", conflicts_with = "family")]
    pub code_file: Option<PathBuf>,
    #[command(flatten)]
    pub code: CodeArgs,
    /// Stragglers the code must resist [default: s of a diagonal code]
    #[arg(long)]
    pub resist: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Data matrix (.mtx or .csv); synthetic Gaussian data when absent
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Rows of the synthetic matrix
    #[arg(long, default_value_t = 1200)]
    pub rows: usize,
    /// Columns of the synthetic matrix
    #[arg(long, default_value_t = 60)]
    pub cols: usize,
    /// Nonzero fraction of the synthetic matrix [default: dense]
    #[arg(long)]
    pub density: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Coding matrix JSON (alternative to the code flags)
    #[arg(long, visible_alias = "code", conflicts_with = "family")]
    pub code_file: Option<PathBuf>,
    #[command(flatten)]
    pub code: CodeArgs,
    #[command(flatten)]
    pub data: DataArgs,
    /// Input vector x, one value per line [default: Gaussian from the seed]
    #[arg(long)]
    pub x: Option<PathBuf>,
    #[command(flatten)]
    pub stragglers: StragglerArgs,
    /// Job trace JSON [default: stdout]
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Per-worker CSV
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Decoded y, one value per line
    #[arg(long)]
    pub y_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GdArgs {
    /// Coding matrix JSON (alternative to the code flags)
    #[arg(long, visible_alias = "code", conflicts_with = "family")]
    pub code_file: Option<PathBuf>,
    #[command(flatten)]
    pub code: CodeArgs,
    /// Run uncoded: identity code over --n blocks, waiting for every worker
    #[arg(long)]
    pub uncoded: bool,
    /// Data matrix (.mtx or .csv); synthetic least squares when absent
    #[arg(long, requires = "rhs")]
    pub matrix: Option<PathBuf>,
    /// Right-hand side b for --matrix
    #[arg(long, requires = "matrix")]
    pub rhs: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    pub rows: usize,
    #[arg(long, default_value_t = 100)]
    pub cols: usize,
    /// Step size [default: 1/λ_max(AᵀA) by power iteration]
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub iters: usize,
    #[command(flatten)]
    pub stragglers: StragglerArgs,
    /// Trace JSON [default: stdout]
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Per-iteration CSV
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Experiment config (.json or .toml)
    #[arg(long)]
    pub config: PathBuf,
    /// Report JSON [default: stdout]
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Per-trial CSV
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Per-scheme summary CSV
    #[arg(long)]
    pub summary_csv: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// Errors from flag or input validation (exit status 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_GUARD: u8 = 4;

fn analysis_status(e: &AnalysisError) -> u8 {
    match e {
        AnalysisError::GuardExceeded { .. } => EXIT_GUARD,
        AnalysisError::InvalidInput(_) => EXIT_USAGE,
        AnalysisError::NotResisting { .. } => EXIT_INFEASIBLE,
        _ => 1,
    }
}

fn code_status(e: &CodeError) -> u8 {
    match e {
        CodeError::InvalidSpec(_) | CodeError::InvalidMatrix(_) | CodeError::Json(_) | CodeError::BlockCountMismatch { .. } => {
            EXIT_USAGE
        }
        CodeError::NoValidCode { .. } => EXIT_INFEASIBLE,
        CodeError::Analysis(a) => analysis_status(a),
        CodeError::Block(_) => EXIT_USAGE,
    }
}

fn decode_status(e: &DecodeError) -> u8 {
    match e {
        DecodeError::Singular { .. } => EXIT_INFEASIBLE,
        _ => EXIT_USAGE,
    }
}

fn exit_status(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() || cause.is::<clap::Error>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<SimError>() {
            return match e {
                SimError::InvalidModel(_) | SimError::InvalidConfig(_) | SimError::Block(_) => EXIT_USAGE,
                SimError::Code(c) => code_status(c),
                SimError::Decode(d) => decode_status(d),
                e if e.is_infeasible() => EXIT_INFEASIBLE,
                _ => 1,
            };
        }
        if let Some(e) = cause.downcast_ref::<CodeError>() {
            return code_status(e);
        }
        if let Some(e) = cause.downcast_ref::<AnalysisError>() {
            return analysis_status(e);
        }
        if let Some(e) = cause.downcast_ref::<DecodeError>() {
            return decode_status(e);
        }
    }
    1
}

fn csv_help(title: &str, header: &str) -> String {
    let cols: Vec<&str> = header.split(',').collect();
    format!("{title} CSV columns (in order):\n  {}", cols.join(", "))
}

/// The clap command with CSV column documentation attached.
pub fn command() -> clap::Command {
    Cli::command()
        .after_help("Exit status: 0 success, 2 invalid flags or input, 3 not decodable, 4 enumeration guard exceeded.\nSeeds: --seed, else COXF_SEED, else 0.")
        .mut_subcommand("mc-rank", |c| c.after_help(csv_help("Output", McReport::CSV_HEADER)))
        .mut_subcommand("audit", |c| c.after_help(csv_help("Output", AuditRecord::CSV_HEADER)))
        .mut_subcommand("simulate", |c| {
            c.after_help(csv_help("--csv (one row per worker; worker and arrival_rank 1-based, empty for failed workers)", JobTrace::CSV_HEADER))
        })
        .mut_subcommand("gd", |c| c.after_help(csv_help("--csv (gradient_norm = ‖ηAᵀ(Ax_t−b)‖²)", GdTrace::CSV_HEADER)))
        .mut_subcommand("compare", |c| {
            c.after_help(format!(
                "{}\n{}",
                csv_help("--csv", TrialRecord::CSV_HEADER),
                csv_help("--summary-csv", SchemeSummary::CSV_HEADER)
            ))
        })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let matches = match command().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_status(&err))
        }
    }
}
