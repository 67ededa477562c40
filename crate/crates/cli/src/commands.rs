//! Implementations of the subcommands.
//!
//! Convention: human-readable summaries go to stdout, machine artifacts go
//! to files, and every primary artifact gets a `<name>.meta.json` sidecar
//! recording the command, the effective configuration, and the write time.
//! Primary artifacts contain no timestamps, so re-running a command with
//! the same inputs and seed reproduces them byte for byte.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::json;

use oerq_core::analysis::analyze as run_analyses;
use oerq_core::benchmark::{paper_benchmark, Benchmark};
use oerq_core::eval::{evaluate as eval_model, stratified_split};
use oerq_core::forest::{extract_features, train_forest, FeatureVector, ForestHyperparams, ForestModel};
use oerq_core::ingest::{parse_dataset, write_jsonl, Format, IngestReport, RawRecord};
use oerq_core::record::{OerRecord, QualityFlag};
use oerq_core::scoring::{score_batch, score_record, ScoredLine};
use oerq_harvest::{harvest as run_harvest, ApiMapping, HarvestConfig, Transport};

use crate::config::FileConfig;
use crate::{
    AnalyzeArgs, BenchmarkArgs, CliError, CliResult, EvaluateArgs, FormatArg, HarvestArgs,
    IngestArgs, PredictArgs, ScoreArgs, TrainArgs,
};

fn require<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::input(format!("missing required {flag}")))
}

fn resolve_format(flag: Option<FormatArg>, config: &FileConfig) -> Result<Format, CliError> {
    match flag {
        Some(FormatArg::Jsonl) => Ok(Format::JsonLines),
        Some(FormatArg::Csv) => Ok(Format::Csv),
        None => match config.format.as_deref() {
            None | Some("jsonl") => Ok(Format::JsonLines),
            Some("csv") => Ok(Format::Csv),
            Some(other) => Err(CliError::input(format!("unknown format `{other}`"))),
        },
    }
}

fn format_name(format: Format) -> &'static str {
    match format {
        Format::JsonLines => "jsonl",
        Format::Csv => "csv",
    }
}

fn load_records(path: &Path, format: Format) -> Result<IngestReport, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::input(format!("cannot open {}: {e}", path.display())))?;
    parse_dataset(BufReader::new(file), format, &path.display().to_string())
        .map_err(CliError::from)
}

/// Dataset id used as benchmark provenance: the bare file name, so a
/// derived benchmark does not depend on where the run happened.
fn dataset_id(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn create_output(path: &Path) -> Result<BufWriter<File>, CliError> {
    let file = File::create(path)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
    Ok(BufWriter::new(file))
}

/// Side-channel for reproducibility metadata: anything time-dependent lives
/// here, never in the primary artifact.
fn write_sidecar(output: &Path, command: &str, effective: serde_json::Value) -> CliResult {
    let written_at_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = json!({
        "command": command,
        "config": effective,
        "written_at_unix": written_at_unix,
    });
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    let mut writer = create_output(&output.with_file_name(name))?;
    serde_json::to_writer_pretty(&mut writer, &meta).map_err(oerq_core::Error::from)?;
    writer.write_all(b"\n")?;
    Ok(())
}

enum BenchmarkSource {
    Derive,
    Paper,
    File(PathBuf),
}

impl BenchmarkSource {
    fn parse(value: &str) -> Self {
        match value {
            "derive" => BenchmarkSource::Derive,
            "paper" => BenchmarkSource::Paper,
            path => BenchmarkSource::File(PathBuf::from(path)),
        }
    }

    fn describe(&self) -> String {
        match self {
            BenchmarkSource::Derive => "derive".to_string(),
            BenchmarkSource::Paper => "paper".to_string(),
            BenchmarkSource::File(path) => path.display().to_string(),
        }
    }

    /// Resolves to a benchmark. `derive` uses the quality-controlled subset
    /// of `records`, tagging the result with the source name.
    fn resolve(&self, records: &[OerRecord], source_name: &str) -> Result<Benchmark, CliError> {
        match self {
            BenchmarkSource::Paper => Ok(paper_benchmark()),
            BenchmarkSource::File(path) => {
                let file = File::open(path).map_err(|e| {
                    CliError::input(format!("cannot open benchmark {}: {e}", path.display()))
                })?;
                Benchmark::from_reader(BufReader::new(file)).map_err(CliError::from)
            }
            BenchmarkSource::Derive => {
                let controlled: Vec<OerRecord> = records
                    .iter()
                    .filter(|r| r.quality_flag == QualityFlag::WithControl)
                    .cloned()
                    .collect();
                if controlled.is_empty() {
                    return Err(CliError::input(
                        "no quality-controlled records to derive a benchmark from",
                    ));
                }
                Benchmark::derive(&controlled, source_name).map_err(CliError::from)
            }
        }
    }
}

fn featurize(
    records: &[OerRecord],
    benchmark: &Benchmark,
) -> (Vec<FeatureVector>, Vec<QualityFlag>) {
    let features = records
        .iter()
        .map(|r| extract_features(r, benchmark))
        .collect();
    let labels = records.iter().map(|r| r.quality_flag).collect();
    (features, labels)
}

fn report_problems_to_stderr(report: &IngestReport) {
    if !report.rejected.is_empty() || !report.warnings.is_empty() {
        eprintln!(
            "{}",
            json!({ "rejected": report.rejected, "warnings": report.warnings })
        );
    }
}

pub fn ingest(args: IngestArgs, config: &FileConfig) -> CliResult {
    let input = require(args.input.or_else(|| config.input.clone()), "--input")?;
    let format = resolve_format(args.format, config)?;
    let output = require(args.output.or_else(|| config.output.clone()), "--output")?;

    let report = load_records(&input, format)?;
    println!(
        "{} parsed, {} rejected",
        report.records.len(),
        report.rejected.len()
    );
    println!(
        "{}",
        serde_json::to_string(&report.summary()).map_err(oerq_core::Error::from)?
    );
    report_problems_to_stderr(&report);
    if report.records.is_empty() {
        return Err(CliError::input(format!(
            "no records parsed from {}",
            input.display()
        )));
    }

    let mut writer = create_output(&output)?;
    write_jsonl(&report.records, &mut writer)?;
    writer.flush()?;
    write_sidecar(
        &output,
        "ingest",
        json!({
            "input": input.display().to_string(),
            "format": format_name(format),
            "output": output.display().to_string(),
        }),
    )?;
    Ok(())
}

pub fn harvest(args: HarvestArgs, config: &FileConfig) -> CliResult {
    let base_url = require(
        args.base_url.or_else(|| config.base_url.clone()),
        "--base-url",
    )?;
    let query = require(args.query.or_else(|| config.query.clone()), "--query")?;
    let output = require(args.output.or_else(|| config.output.clone()), "--output")?;
    let harvest_config = HarvestConfig {
        base_url,
        query,
        page_size: args.page_size.or(config.page_size).unwrap_or(50),
        max_records: args.max_records.or(config.max_records).unwrap_or(10_000),
        retry_limit: args.retry_limit.or(config.retry_limit).unwrap_or(3),
        request_timeout_secs: args.timeout_secs.or(config.timeout_secs).unwrap_or(30),
        backoff_base_ms: args.backoff_ms.or(config.backoff_ms).unwrap_or(500),
    };
    harvest_config.validate().map_err(CliError::Input)?;

    let mapping = match args.mapping.or_else(|| config.mapping.clone()) {
        None => ApiMapping::default(),
        Some(path) => {
            let file = File::open(&path).map_err(|e| {
                CliError::input(format!("cannot open mapping {}: {e}", path.display()))
            })?;
            serde_json::from_reader(BufReader::new(file)).map_err(|e| {
                CliError::input(format!("invalid mapping {}: {e}", path.display()))
            })?
        }
    };

    let transcript = args.transcript.or_else(|| config.transcript.clone());
    let mut transport: Box<dyn Transport> = match (transcript, args.live) {
        (Some(path), _) => Box::new(
            oerq_harvest::TranscriptTransport::from_file(&path).map_err(|e| {
                CliError::input(format!("cannot load transcript {}: {e}", path.display()))
            })?,
        ),
        (None, true) => Box::new(oerq_harvest::UreqTransport::new(
            harvest_config.request_timeout(),
        )),
        (None, false) => {
            return Err(CliError::input(
                "refusing to touch the network without --live; pass --transcript FILE to replay a recorded run",
            ))
        }
    };

    let outcome = run_harvest(&harvest_config, &mapping, transport.as_mut());

    // Partial results are still written before any failure is reported.
    let mut writer = create_output(&output)?;
    write_jsonl(&outcome.report.records, &mut writer)?;
    writer.flush()?;
    write_sidecar(
        &output,
        "harvest",
        json!({
            "base_url": harvest_config.base_url,
            "query": harvest_config.query,
            "page_size": harvest_config.page_size,
            "max_records": harvest_config.max_records,
            "retry_limit": harvest_config.retry_limit,
            "timeout_secs": harvest_config.request_timeout_secs,
            "backoff_ms": harvest_config.backoff_base_ms,
            "output": output.display().to_string(),
        }),
    )?;

    println!(
        "harvested {} records from {} page(s), {} retries",
        outcome.report.records.len(),
        outcome.pages_fetched,
        outcome.retries
    );
    report_problems_to_stderr(&outcome.report);
    match outcome.failure {
        None => Ok(()),
        Some(reason) => Err(CliError::External(format!(
            "harvest incomplete ({} records preserved): {reason}",
            outcome.report.records.len()
        ))),
    }
}

pub fn benchmark(args: BenchmarkArgs, config: &FileConfig) -> CliResult {
    let output = require(args.output.or_else(|| config.output.clone()), "--output")?;
    let (benchmark, input_echo) = if args.paper {
        (paper_benchmark(), json!(null))
    } else {
        let input = require(args.input.or_else(|| config.input.clone()), "--input")?;
        let format = resolve_format(args.format, config)?;
        let report = load_records(&input, format)?;
        report_problems_to_stderr(&report);
        let benchmark = BenchmarkSource::Derive
            .resolve(&report.records, &dataset_id(&input))?;
        (benchmark, json!(input.display().to_string()))
    };

    let mut writer = create_output(&output)?;
    benchmark.write_to(&mut writer)?;
    writer.flush()?;
    write_sidecar(
        &output,
        "benchmark",
        json!({
            "input": input_echo,
            "paper": args.paper,
            "output": output.display().to_string(),
        }),
    )?;
    println!(
        "wrote benchmark ({}) to {}",
        benchmark.provenance,
        output.display()
    );
    Ok(())
}

pub fn score(args: ScoreArgs, config: &FileConfig) -> CliResult {
    let input = require(args.input.or_else(|| config.input.clone()), "--input")?;
    let format = resolve_format(args.format, config)?;
    let output = require(args.output.or_else(|| config.output.clone()), "--output")?;
    let source = BenchmarkSource::parse(
        &args
            .benchmark
            .or_else(|| config.benchmark.clone())
            .unwrap_or_else(|| "derive".to_string()),
    );

    let report = load_records(&input, format)?;
    report_problems_to_stderr(&report);
    if report.records.is_empty() {
        return Err(CliError::input(format!(
            "no records parsed from {}",
            input.display()
        )));
    }
    let benchmark = source.resolve(&report.records, &dataset_id(&input))?;
    let scores = score_batch(&report.records, &benchmark);

    let mut writer = create_output(&output)?;
    for (record, score) in report.records.iter().zip(&scores) {
        let line = ScoredLine::new(record, score);
        serde_json::to_writer(&mut writer, &line).map_err(oerq_core::Error::from)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    write_sidecar(
        &output,
        "score",
        json!({
            "input": input.display().to_string(),
            "format": format_name(format),
            "benchmark": source.describe(),
            "output": output.display().to_string(),
        }),
    )?;
    println!("scored {} records", scores.len());
    Ok(())
}

pub fn train(args: TrainArgs, config: &FileConfig) -> CliResult {
    let input = require(args.input.or_else(|| config.input.clone()), "--input")?;
    let format = resolve_format(args.format, config)?;
    let output = require(args.output.or_else(|| config.output.clone()), "--output")?;
    let test_out = args.test_out.or_else(|| config.test_out.clone());
    let source = BenchmarkSource::parse(
        &args
            .benchmark
            .or_else(|| config.benchmark.clone())
            .unwrap_or_else(|| "derive".to_string()),
    );
    let split = args.split.or(config.split).unwrap_or(0.8);
    let seed = args.seed.or(config.seed).unwrap_or(42);
    let params = ForestHyperparams {
        tree_count: args.trees.or(config.trees).unwrap_or(100),
        max_depth: args.max_depth.or(config.max_depth),
        min_samples_leaf: args.min_leaf.or(config.min_leaf).unwrap_or(1),
        features_per_split: args
            .features_per_split
            .or(config.features_per_split)
            .unwrap_or(2),
        seed,
    };

    let report = load_records(&input, format)?;
    report_problems_to_stderr(&report);
    let total = report.records.len();
    let labeled: Vec<OerRecord> = report
        .records
        .into_iter()
        .filter(|r| r.quality_flag != QualityFlag::Unknown)
        .collect();
    let excluded = total - labeled.len();

    let benchmark = source.resolve(&labeled, &dataset_id(&input))?;
    let (train_records, test_records) =
        stratified_split(&labeled, |r| r.quality_flag, split, seed)?;
    let (train_x, train_y) = featurize(&train_records, &benchmark);
    let model = train_forest(&train_x, &train_y, &params)?;

    let correct = train_x
        .iter()
        .zip(&train_y)
        .filter(|(x, y)| model.predict(x).label == **y)
        .count();
    let train_accuracy = correct as f64 / train_x.len() as f64;

    let mut writer = create_output(&output)?;
    model.write_to(&mut writer)?;
    writer.flush()?;
    if let Some(test_path) = &test_out {
        let mut writer = create_output(test_path)?;
        write_jsonl(&test_records, &mut writer)?;
        writer.flush()?;
    }
    write_sidecar(
        &output,
        "train",
        json!({
            "input": input.display().to_string(),
            "format": format_name(format),
            "benchmark": source.describe(),
            "output": output.display().to_string(),
            "test_out": test_out.as_ref().map(|p| p.display().to_string()),
            "trees": params.tree_count,
            "max_depth": params.max_depth,
            "min_leaf": params.min_samples_leaf,
            "features_per_split": params.features_per_split,
            "split": split,
            "seed": seed,
        }),
    )?;

    let summary = oerq_core::ingest::dataset_summary(&train_records);
    println!(
        "trained {} trees on {} records ({} with control, {} without); train accuracy {:.3}",
        params.tree_count,
        train_records.len(),
        summary.with_control,
        summary.without_control,
        train_accuracy
    );
    match &test_out {
        Some(path) => println!(
            "held out {} records to {}",
            test_records.len(),
            path.display()
        ),
        None => println!("held out {} records (not written)", test_records.len()),
    }
    if excluded > 0 {
        println!("excluded {excluded} records with unknown quality flag");
    }
    Ok(())
}

pub fn evaluate(args: EvaluateArgs, config: &FileConfig) -> CliResult {
    let model_path = require(args.model.or_else(|| config.model.clone()), "--model")?;
    let input = require(args.input.or_else(|| config.input.clone()), "--input")?;
    let format = resolve_format(args.format, config)?;
    let output = require(args.output.or_else(|| config.output.clone()), "--output")?;
    let source_text = require(
        args.benchmark.or_else(|| config.benchmark.clone()),
        "--benchmark (the benchmark used at training time)",
    )?;
    let source = BenchmarkSource::parse(&source_text);
    if matches!(source, BenchmarkSource::Derive) {
        return Err(CliError::input(
            "evaluate needs the training-time benchmark; pass `paper` or a benchmark file, not `derive`",
        ));
    }

    let model_file = File::open(&model_path)
        .map_err(|e| CliError::input(format!("cannot open model {}: {e}", model_path.display())))?;
    let model = ForestModel::from_reader(BufReader::new(model_file))?;

    let report = load_records(&input, format)?;
    report_problems_to_stderr(&report);
    let labeled: Vec<OerRecord> = report
        .records
        .into_iter()
        .filter(|r| r.quality_flag != QualityFlag::Unknown)
        .collect();
    if labeled.is_empty() {
        return Err(CliError::input("empty test set"));
    }

    let benchmark = source.resolve(&labeled, &dataset_id(&input))?;
    let (test_x, test_y) = featurize(&labeled, &benchmark);
    let eval_report = eval_model(&model, &test_x, &test_y)?;

    let mut writer = create_output(&output)?;
    serde_json::to_writer_pretty(&mut writer, &eval_report).map_err(oerq_core::Error::from)?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    write_sidecar(
        &output,
        "evaluate",
        json!({
            "model": model_path.display().to_string(),
            "input": input.display().to_string(),
            "format": format_name(format),
            "benchmark": source.describe(),
            "output": output.display().to_string(),
        }),
    )?;
    print!("{eval_report}");
    Ok(())
}

pub fn analyze(args: AnalyzeArgs, config: &FileConfig) -> CliResult {
    let input = require(args.input.or_else(|| config.input.clone()), "--input")?;
    let format = resolve_format(args.format, config)?;
    let output = require(args.output.or_else(|| config.output.clone()), "--output")?;

    let report = load_records(&input, format)?;
    report_problems_to_stderr(&report);
    if report.records.is_empty() {
        return Err(CliError::input(format!(
            "no records parsed from {}",
            input.display()
        )));
    }
    let analysis = run_analyses(&report.records);

    let mut writer = create_output(&output)?;
    serde_json::to_writer_pretty(&mut writer, &analysis).map_err(oerq_core::Error::from)?;
    writer.write_all(b"\n")?;
    writer.flush()?;

    let csv_path = |suffix: &str| {
        let stem = output
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "analysis".to_string());
        output.with_file_name(format!("{stem}_{suffix}.csv"))
    };
    let availability_csv = csv_path("availability");
    let yearly_csv = csv_path("yearly");
    analysis.write_availability_csv(create_output(&availability_csv)?)?;
    analysis.write_yearly_csv(create_output(&yearly_csv)?)?;

    write_sidecar(
        &output,
        "analyze",
        json!({
            "input": input.display().to_string(),
            "format": format_name(format),
            "output": output.display().to_string(),
            "availability_csv": availability_csv.display().to_string(),
            "yearly_csv": yearly_csv.display().to_string(),
        }),
    )?;

    println!(
        "analyzed {} records ({} undated); reports in {}, {}, {}",
        report.records.len(),
        analysis.undated,
        output.display(),
        availability_csv.display(),
        yearly_csv.display()
    );
    Ok(())
}

pub fn predict(args: PredictArgs, config: &FileConfig) -> CliResult {
    let model_path = require(args.model.or_else(|| config.model.clone()), "--model")?;
    let source_text = require(
        args.benchmark.or_else(|| config.benchmark.clone()),
        "--benchmark (the benchmark used at training time)",
    )?;
    let source = BenchmarkSource::parse(&source_text);
    if matches!(source, BenchmarkSource::Derive) {
        return Err(CliError::input(
            "predict needs the training-time benchmark; pass `paper` or a benchmark file, not `derive`",
        ));
    }

    let model_file = File::open(&model_path)
        .map_err(|e| CliError::input(format!("cannot open model {}: {e}", model_path.display())))?;
    let model = ForestModel::from_reader(BufReader::new(model_file))?;
    let benchmark = source.resolve(&[], "stdin")?;

    let mut body = String::new();
    std::io::stdin()
        .read_to_string(&mut body)
        .map_err(|e| CliError::input(format!("cannot read stdin: {e}")))?;
    let raw: RawRecord = serde_json::from_str(body.trim())
        .map_err(|e| CliError::input(format!("stdin is not a record object: {e}")))?;
    let mut warnings = Vec::new();
    let record = raw.into_record(0, &mut warnings);
    for warning in &warnings {
        eprintln!("warning: {}: {}", warning.field, warning.reason);
    }

    let scores = score_record(&record, &benchmark);
    let prediction = model.predict(&extract_features(&record, &benchmark));
    let out = json!({
        "url": record.url,
        "availability": scores.availability,
        "normal": scores.normal,
        "ratings": scores.per_field_rating,
        "label": prediction.label.as_str(),
        "vote_fraction": prediction.vote_fraction,
    });
    println!("{out}");
    Ok(())
}
