//! Crate-wide error type.

use crate::fields::ScoredField;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty benchmark population")]
    EmptyPopulation,
    #[error("benchmark population must contain only quality-controlled records")]
    UncontrolledRecord,
    #[error("all importance rates are zero")]
    AllZeroImportance,
    #[error("degenerate distribution for {field}: {reason}")]
    DegenerateDistribution {
        field: &'static str,
        reason: String,
    },
    #[error("{0} is rated by presence, not length")]
    NotLengthRated(ScoredField),
    #[error("gini impurity is undefined for an empty node")]
    EmptyNode,
    #[error("degenerate training set: both classes must be present")]
    DegenerateTrainingSet,
    #[error("features and labels differ in length ({features} vs {labels})")]
    LengthMismatch { features: usize, labels: usize },
    #[error("training requires at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),
    #[error("records with an unknown quality flag must be excluded first")]
    UnknownFlag,
    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    InvalidFraction(f64),
    #[error("empty test set")]
    EmptyTestSet,
    #[error("unsupported model version {0}")]
    UnsupportedModelVersion(u32),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid benchmark: {0}")]
    InvalidBenchmark(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
