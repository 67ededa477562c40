//! `oerq` — score OER metadata quality and predict quality control.
//!
//! Subcommands cover the whole pipeline: `ingest` parses datasets into the
//! canonical JSON-lines form, `harvest` pulls records from a repository
//! search API, `benchmark` derives or emits field-importance benchmarks,
//! `score` applies the availability and normal scoring models, `train` fits
//! the random forest, `evaluate` reports classification metrics, `analyze`
//! produces the exploratory tables, and `predict` classifies a single
//! record from stdin.
//!
//! Exit codes: 0 on success, 2 on input or validation errors, 3 on
//! external-service failures.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::FileConfig;

#[derive(Debug, Parser)]
#[command(name = "oerq", version, about = "OER metadata quality scoring and prediction")]
struct Cli {
    /// JSON config file mirroring the flags; explicit flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a JSON-lines or CSV dataset into canonical JSON-lines.
    Ingest(IngestArgs),
    /// Fetch records from a repository search API.
    Harvest(HarvestArgs),
    /// Derive a benchmark from quality-controlled records, or emit the
    /// built-in reference benchmark.
    Benchmark(BenchmarkArgs),
    /// Compute availability and normal scores for every record.
    Score(ScoreArgs),
    /// Train the quality-control classifier on a stratified split.
    Train(TrainArgs),
    /// Evaluate a trained model against a labeled test set.
    Evaluate(EvaluateArgs),
    /// Availability-by-group and yearly-trend analyses.
    Analyze(AnalyzeArgs),
    /// Score and classify one record read as JSON from stdin.
    Predict(PredictArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Jsonl,
    Csv,
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// Input dataset path.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Input format.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Canonical JSON-lines output path.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct HarvestArgs {
    /// Search endpoint base URL.
    #[arg(long)]
    base_url: Option<String>,
    /// Search term.
    #[arg(long)]
    query: Option<String>,
    #[arg(long)]
    page_size: Option<usize>,
    #[arg(long)]
    max_records: Option<usize>,
    #[arg(long)]
    retry_limit: Option<u32>,
    #[arg(long)]
    timeout_secs: Option<u64>,
    /// First retry backoff in milliseconds (doubles per retry).
    #[arg(long)]
    backoff_ms: Option<u64>,
    /// Replay responses from a transcript file instead of the network.
    #[arg(long, value_name = "FILE")]
    transcript: Option<PathBuf>,
    /// Explicitly allow live network access.
    #[arg(long)]
    live: bool,
    /// API mapping file (JSON); defaults to the built-in best-effort map.
    #[arg(long, value_name = "FILE")]
    mapping: Option<PathBuf>,
    /// Canonical JSON-lines output path.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchmarkArgs {
    /// Input dataset to derive from (not needed with --paper).
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Emit the built-in reference benchmark instead of deriving one.
    #[arg(long)]
    paper: bool,
    /// Benchmark JSON output path.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Benchmark source: `derive`, `paper`, or a benchmark JSON path.
    #[arg(long)]
    benchmark: Option<String>,
    /// Scored JSON-lines output path.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Benchmark source: `derive`, `paper`, or a benchmark JSON path.
    #[arg(long)]
    benchmark: Option<String>,
    /// Model JSON output path.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Where to write the held-out test records (canonical JSON-lines).
    #[arg(long)]
    test_out: Option<PathBuf>,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    min_leaf: Option<usize>,
    #[arg(long)]
    features_per_split: Option<usize>,
    /// Training fraction of the stratified split, strictly between 0 and 1.
    #[arg(long)]
    split: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Trained model JSON path.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Labeled test dataset path.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Benchmark source used at training time: `paper` or a benchmark path.
    #[arg(long)]
    benchmark: Option<String>,
    /// Evaluation report JSON output path.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Report JSON output path; CSV tables are written next to it.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Trained model JSON path.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Benchmark source used at training time: `paper` or a benchmark path.
    #[arg(long)]
    benchmark: Option<String>,
}

/// Errors carrying the process exit code.
#[derive(Debug)]
enum CliError {
    /// Input or validation problem; exits 2.
    Input(String),
    /// External service failure; exits 3.
    External(String),
}

impl CliError {
    fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}

impl From<oerq_core::Error> for CliError {
    fn from(err: oerq_core::Error) -> Self {
        CliError::Input(err.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Input(err.to_string())
    }
}

type CliResult = Result<(), CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file_config = match FileConfig::load(cli.config.as_deref()) {
        Ok(config) => config,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Ingest(args) => commands::ingest(args, &file_config),
        Command::Harvest(args) => commands::harvest(args, &file_config),
        Command::Benchmark(args) => commands::benchmark(args, &file_config),
        Command::Score(args) => commands::score(args, &file_config),
        Command::Train(args) => commands::train(args, &file_config),
        Command::Evaluate(args) => commands::evaluate(args, &file_config),
        Command::Analyze(args) => commands::analyze(args, &file_config),
        Command::Predict(args) => commands::predict(args, &file_config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::External(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
