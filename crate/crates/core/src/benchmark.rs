//! Benchmark derivation: per-field importance rates, normalized weights, and
//! fitted length distributions.
//!
//! A benchmark is derived from quality-controlled records only. The
//! importance rate of a field is its availability rate in that population;
//! the normalized rates are the weights of both scoring models. For the
//! three length-rated fields a normal distribution is fitted to the lengths
//! of records that actually have the field.
//!
//! [`paper_benchmark`] returns the fixed published reference benchmark under
//! the provenance tag `paper-table-1`; its rounded weights intentionally sum
//! to 1.002 and are kept verbatim for reproduction.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{FieldMap, LengthField};
use crate::record::{OerRecord, QualityFlag};

/// Provenance tag of the published reference benchmark.
pub const PAPER_PROVENANCE: &str = "paper-table-1";

/// Normal distribution fitted to a field's lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthDistribution {
    pub mean: f64,
    pub std: f64,
}

/// The fitted distributions for the three length-rated fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthDistributions {
    pub title: LengthDistribution,
    pub description: LengthDistribution,
    pub subjects: LengthDistribution,
}

impl std::ops::Index<LengthField> for LengthDistributions {
    type Output = LengthDistribution;

    fn index(&self, field: LengthField) -> &LengthDistribution {
        match field {
            LengthField::Title => &self.title,
            LengthField::Description => &self.description,
            LengthField::Subjects => &self.subjects,
        }
    }
}

/// Per-field importance rates, normalized weights, and length fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Benchmark {
    pub importance: FieldMap<f64>,
    pub normalized_importance: FieldMap<f64>,
    pub distributions: LengthDistributions,
    pub provenance: String,
}

impl Benchmark {
    /// Derives a complete benchmark from a quality-controlled population.
    pub fn derive(records: &[OerRecord], provenance: &str) -> Result<Self> {
        let importance = derive_importance(records)?;
        let normalized_importance = normalize_importance(&importance)?;
        let fit = |field| fit_length_distribution(records, field);
        let distributions = LengthDistributions {
            title: fit(LengthField::Title)?,
            description: fit(LengthField::Description)?,
            subjects: fit(LengthField::Subjects)?,
        };
        Ok(Self {
            importance,
            normalized_importance,
            distributions,
            provenance: provenance.to_string(),
        })
    }

    /// Sanity checks used when loading a benchmark from a file. Weight sums
    /// are not checked: the reference preset legitimately sums above 1.
    pub fn validate(&self) -> Result<()> {
        for (field, &value) in self.importance.iter() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidBenchmark(format!(
                    "importance for {field} out of [0, 1]: {value}"
                )));
            }
        }
        for (field, &value) in self.normalized_importance.iter() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidBenchmark(format!(
                    "normalized importance for {field} out of [0, 1]: {value}"
                )));
            }
        }
        for field in LengthField::ALL {
            let dist = self.distributions[field];
            if !dist.mean.is_finite() || !dist.std.is_finite() || dist.std <= 0.0 {
                return Err(Error::InvalidBenchmark(format!(
                    "degenerate distribution for {}: mean {}, std {}",
                    field.name(),
                    dist.mean,
                    dist.std
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let benchmark: Benchmark = serde_json::from_reader(reader)?;
        benchmark.validate()?;
        Ok(benchmark)
    }

    pub fn write_to<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(self.to_json()?.as_bytes())?;
        writer.write_all(b"\n")?;
        Ok(())
    }
}

/// Importance rate of each field: the fraction of the quality-controlled
/// population in which the field is present.
pub fn derive_importance(records: &[OerRecord]) -> Result<FieldMap<f64>> {
    if records.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    if records
        .iter()
        .any(|r| r.quality_flag != QualityFlag::WithControl)
    {
        return Err(Error::UncontrolledRecord);
    }
    let total = records.len() as f64;
    Ok(FieldMap::from_fn(|field| {
        let present = records.iter().filter(|r| r.field_present(field)).count();
        present as f64 / total
    }))
}

/// Divides every importance rate by the sum of all rates. The result sums
/// to 1 and never a hair above it, so a fully populated record scores an
/// availability of at most 1 under a derived benchmark.
pub fn normalize_importance(importance: &FieldMap<f64>) -> Result<FieldMap<f64>> {
    let sum: f64 = importance.values().sum();
    if sum <= 0.0 {
        return Err(Error::AllZeroImportance);
    }
    let mut normalized = importance.map(|_, &v| v / sum);
    // Rounding can leave the total a few ULPs above 1; rescale until it
    // lands at or below 1.
    for _ in 0..4 {
        let total: f64 = normalized.values().sum();
        if total <= 1.0 {
            break;
        }
        normalized = normalized.map(|_, &v| v / total);
    }
    Ok(normalized)
}

/// Fits a normal distribution to the lengths of records that have the
/// field. Mean is the arithmetic mean; std is the sample standard deviation
/// (n − 1 denominator).
pub fn fit_length_distribution(
    records: &[OerRecord],
    field: LengthField,
) -> Result<LengthDistribution> {
    let lengths: Vec<f64> = records
        .iter()
        .filter(|r| r.field_present(field.into()))
        .map(|r| r.field_length(field) as f64)
        .collect();
    if lengths.len() < 2 {
        return Err(Error::DegenerateDistribution {
            field: field.name(),
            reason: format!("only {} present value(s), need at least 2", lengths.len()),
        });
    }
    let n = lengths.len() as f64;
    let mean = lengths.iter().sum::<f64>() / n;
    let variance = lengths.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let std = variance.sqrt();
    if std <= 0.0 {
        return Err(Error::DegenerateDistribution {
            field: field.name(),
            reason: "all present values are identical (std = 0)".to_string(),
        });
    }
    Ok(LengthDistribution { mean, std })
}

/// The published reference benchmark, verbatim: importance and normalized
/// rates for the seven fields plus the three length fits.
pub fn paper_benchmark() -> Benchmark {
    // Field order: title, description, subjects, level, language,
    // time required, accessibilities.
    let importance = [1.0, 1.0, 0.86, 0.98, 0.92, 0.58, 0.59];
    let normalized = [0.17, 0.17, 0.145, 0.165, 0.155, 0.098, 0.099];
    let as_map = |values: [f64; 7]| FieldMap::from_fn(|field| values[field as usize]);
    Benchmark {
        importance: as_map(importance),
        normalized_importance: as_map(normalized),
        distributions: LengthDistributions {
            title: LengthDistribution {
                mean: 5.5,
                std: 2.5,
            },
            description: LengthDistribution {
                mean: 54.5,
                std: 40.0,
            },
            subjects: LengthDistribution {
                mean: 4.5,
                std: 3.5,
            },
        },
        provenance: PAPER_PROVENANCE.to_string(),
    }
}
