//! Quality analytics for Open Educational Resource (OER) metadata.
//!
//! The crate scores how complete and how well-formed an OER's metadata is
//! against a benchmark derived from quality-controlled records, and predicts
//! whether a resource would pass quality control using a from-scratch random
//! forest over six metadata-derived features.
//!
//! The main pieces:
//!
//! - [`record`]: the record schema, the seven scored fields, and the
//!   presence/length semantics everything else builds on.
//! - [`ingest`]: JSON-lines and CSV parsing into validated records.
//! - [`benchmark`]: per-field importance rates, normalized weights, and
//!   fitted length distributions, including the published reference preset.
//! - [`scoring`]: the reverse-Z-score rating functions plus the availability
//!   and normal scoring models.
//! - [`forest`]: feature extraction, random forest training and prediction,
//!   Gini feature importances, versioned model serialization.
//! - [`eval`]: stratified splitting and classification metrics.
//! - [`analysis`]: exploratory availability-by-group and yearly-trend reports.
//!
//! Batch scoring and tree construction run data-parallel under the default
//! `parallel` feature; the sequential fallback produces bit-identical output.

pub mod analysis;
pub mod benchmark;
pub mod error;
pub mod eval;
pub mod fields;
pub mod forest;
pub mod ingest;
pub mod record;
pub mod rng;
pub mod scoring;
pub mod synth;

pub use analysis::{analyze, AnalysisReport};
pub use benchmark::{paper_benchmark, Benchmark, LengthDistribution};
pub use error::{Error, Result};
pub use eval::{evaluate, stratified_split, EvalReport};
pub use fields::{FieldMap, LengthField, ScoredField};
pub use forest::{
    extract_features, train_forest, train_forest_sequential, FeatureVector, ForestHyperparams,
    ForestModel,
};
pub use ingest::{dataset_summary, parse_dataset, DatasetSummary, Format, IngestReport};
pub use record::{IsoDate, OerRecord, QualityFlag};
pub use scoring::{score_batch, score_batch_sequential, score_record, QualityScores};
