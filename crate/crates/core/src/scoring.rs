//! The two scoring models: availability score and normal score.
//!
//! The availability score of a record is the sum of the normalized
//! importance weights of its present fields, so it measures weighted
//! completeness. The normal score weights each field's rating instead:
//! length-rated fields get the reverse-Z-score rating
//! `1 / max(1, ceil(|length − mean| / std))`, presence-rated fields get 1 or
//! 0. A field at the fitted mean rates 1; an empty field rates 0. Absent
//! fields contribute 0 to both scores, so `normal <= availability` always
//! holds.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmark::{Benchmark, LengthDistribution};
use crate::fields::{FieldMap, ScoredField};
use crate::record::OerRecord;

/// Both model scores plus the per-field ratings behind the normal score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityScores {
    pub availability: f64,
    pub normal: f64,
    pub per_field_rating: FieldMap<f64>,
}

/// Reverse-Z-score rating of a length against a fitted distribution: 1 at
/// the mean (and anywhere within one standard deviation), stepping down as
/// `1/k` per additional standard deviation; 0 when the field is empty.
pub fn numeric_rating(length: usize, dist: &LengthDistribution) -> f64 {
    if length == 0 {
        return 0.0;
    }
    let deviations = ((length as f64 - dist.mean).abs() / dist.std).ceil();
    1.0 / deviations.max(1.0)
}

/// Presence rating: 1 if available, 0 otherwise.
pub fn boolean_rating(present: bool) -> f64 {
    if present {
        1.0
    } else {
        0.0
    }
}

/// Rating of one field of a record: numeric for the length-rated fields,
/// boolean for the rest.
pub fn field_rating(record: &OerRecord, field: ScoredField, benchmark: &Benchmark) -> f64 {
    match field.length_field() {
        Some(length_field) => numeric_rating(
            record.field_length(length_field),
            &benchmark.distributions[length_field],
        ),
        None => boolean_rating(record.field_present(field)),
    }
}

/// Weighted completeness: the sum of normalized importances over the
/// record's present fields.
pub fn availability_score(record: &OerRecord, benchmark: &Benchmark) -> f64 {
    ScoredField::ALL
        .iter()
        .filter(|&&field| record.field_present(field))
        .map(|&field| benchmark.normalized_importance[field])
        .sum()
}

/// Weighted adherence to the benchmark: the importance-weighted sum of the
/// per-field ratings over all fields.
pub fn normal_score(record: &OerRecord, benchmark: &Benchmark) -> f64 {
    ScoredField::ALL
        .iter()
        .map(|&field| benchmark.normalized_importance[field] * field_rating(record, field, benchmark))
        .sum()
}

/// Computes both scores and the rating breakdown for one record.
pub fn score_record(record: &OerRecord, benchmark: &Benchmark) -> QualityScores {
    let per_field_rating = FieldMap::from_fn(|field| field_rating(record, field, benchmark));
    QualityScores {
        availability: availability_score(record, benchmark),
        normal: normal_score(record, benchmark),
        per_field_rating,
    }
}

/// Scores a batch, preserving input order. With the `parallel` feature the
/// records are scored concurrently; the output is identical either way.
#[cfg(feature = "parallel")]
pub fn score_batch(records: &[OerRecord], benchmark: &Benchmark) -> Vec<QualityScores> {
    records
        .par_iter()
        .map(|record| score_record(record, benchmark))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn score_batch(records: &[OerRecord], benchmark: &Benchmark) -> Vec<QualityScores> {
    score_batch_sequential(records, benchmark)
}

/// Sequential batch scoring; the fallback used without the `parallel`
/// feature and the baseline the benches compare against.
pub fn score_batch_sequential(records: &[OerRecord], benchmark: &Benchmark) -> Vec<QualityScores> {
    records
        .iter()
        .map(|record| score_record(record, benchmark))
        .collect()
}

/// One line of the scored JSON-lines output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoredLine {
    pub url: String,
    pub availability: f64,
    pub normal: f64,
    pub ratings: FieldMap<f64>,
}

impl ScoredLine {
    pub fn new(record: &OerRecord, scores: &QualityScores) -> Self {
        Self {
            url: record.url.clone(),
            availability: scores.availability,
            normal: scores.normal,
            ratings: scores.per_field_rating,
        }
    }
}
