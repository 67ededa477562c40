//! Exploratory analyses: per-field availability split by quality-control
//! group, and the yearly share of quality-controlled records.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fields::{FieldMap, ScoredField};
use crate::record::{OerRecord, QualityFlag};

/// Years with fewer records than this are flagged low-confidence.
pub const DEFAULT_LOW_CONFIDENCE_THRESHOLD: usize = 10;

/// Availability rates of one field within each quality-control group.
/// `None` means the group is empty, not that the rate is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupRates {
    pub with_control_rate: Option<f64>,
    pub without_control_rate: Option<f64>,
}

/// One year of the quality-control trend. `controlled_fraction` is
/// with-control over labeled records; `total` counts every record dated in
/// the year, including unknown-flag ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YearStat {
    pub controlled_fraction: Option<f64>,
    pub total: usize,
    pub low_confidence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub availability_by_group: FieldMap<GroupRates>,
    pub yearly_control_share: BTreeMap<i32, YearStat>,
    /// Records with neither issue date nor availability date; excluded from
    /// the yearly trend.
    pub undated: usize,
}

/// Per-field availability fraction within each quality-control group.
/// Unknown-flag records are excluded.
pub fn availability_by_group(records: &[OerRecord]) -> FieldMap<GroupRates> {
    let with_control: Vec<&OerRecord> = records
        .iter()
        .filter(|r| r.quality_flag == QualityFlag::WithControl)
        .collect();
    let without_control: Vec<&OerRecord> = records
        .iter()
        .filter(|r| r.quality_flag == QualityFlag::WithoutControl)
        .collect();
    let rate = |group: &[&OerRecord], field: ScoredField| -> Option<f64> {
        if group.is_empty() {
            return None;
        }
        let present = group.iter().filter(|r| r.field_present(field)).count();
        Some(present as f64 / group.len() as f64)
    };
    FieldMap::from_fn(|field| GroupRates {
        with_control_rate: rate(&with_control, field),
        without_control_rate: rate(&without_control, field),
    })
}

/// Groups records by year (issue date, falling back to availability date)
/// and computes the controlled fraction per year. Returns the per-year map
/// and the count of records with no usable date.
pub fn yearly_control_trend(
    records: &[OerRecord],
    low_confidence_threshold: usize,
) -> (BTreeMap<i32, YearStat>, usize) {
    let mut per_year: BTreeMap<i32, (usize, usize, usize)> = BTreeMap::new(); // (with, without, total)
    let mut undated = 0usize;
    for record in records {
        let Some(date) = record.date_issued.or(record.date_available) else {
            undated += 1;
            continue;
        };
        let entry = per_year.entry(date.year()).or_default();
        entry.2 += 1;
        match record.quality_flag {
            QualityFlag::WithControl => entry.0 += 1,
            QualityFlag::WithoutControl => entry.1 += 1,
            QualityFlag::Unknown => {}
        }
    }
    let years = per_year
        .into_iter()
        .map(|(year, (with, without, total))| {
            let labeled = with + without;
            let controlled_fraction = (labeled > 0).then(|| with as f64 / labeled as f64);
            (
                year,
                YearStat {
                    controlled_fraction,
                    total,
                    low_confidence: total < low_confidence_threshold,
                },
            )
        })
        .collect();
    (years, undated)
}

/// Runs both analyses with the default low-confidence threshold.
pub fn analyze(records: &[OerRecord]) -> AnalysisReport {
    let (yearly_control_share, undated) =
        yearly_control_trend(records, DEFAULT_LOW_CONFIDENCE_THRESHOLD);
    AnalysisReport {
        availability_by_group: availability_by_group(records),
        yearly_control_share,
        undated,
    }
}

impl AnalysisReport {
    /// The availability table as CSV, one row per field.
    pub fn write_availability_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["field", "with_control_rate", "without_control_rate"])
            .map_err(to_io)?;
        let fmt = |rate: Option<f64>| rate.map(|r| format!("{r:.6}")).unwrap_or_default();
        for (field, rates) in self.availability_by_group.iter() {
            out.write_record([
                field.name(),
                &fmt(rates.with_control_rate),
                &fmt(rates.without_control_rate),
            ])
            .map_err(to_io)?;
        }
        out.flush()?;
        Ok(())
    }

    /// The yearly trend as CSV, one row per year.
    pub fn write_yearly_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["year", "controlled_fraction", "total", "low_confidence"])
            .map_err(to_io)?;
        for (year, stat) in &self.yearly_control_share {
            out.write_record([
                year.to_string(),
                stat.controlled_fraction
                    .map(|f| format!("{f:.6}"))
                    .unwrap_or_default(),
                stat.total.to_string(),
                stat.low_confidence.to_string(),
            ])
            .map_err(to_io)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn to_io(err: csv::Error) -> crate::error::Error {
    std::io::Error::other(err).into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark::derive_importance;
    use crate::record::IsoDate;

    fn record(flag: QualityFlag, subjects: &[&str], year: Option<i32>) -> OerRecord {
        OerRecord {
            url: "u".into(),
            title: "t".into(),
            subjects: subjects.iter().map(|s| s.to_string()).collect(),
            date_issued: year.map(|y| IsoDate::new(y, 6, 15).unwrap()),
            quality_flag: flag,
            ..OerRecord::default()
        }
    }

    #[test]
    fn group_rates_are_direct_fractions() {
        let records = vec![
            record(QualityFlag::WithControl, &["s"], None),
            record(QualityFlag::WithControl, &[], None),
            record(QualityFlag::WithoutControl, &["s"], None),
            record(QualityFlag::WithoutControl, &["s"], None),
        ];
        let rates = availability_by_group(&records);
        let subj = rates[ScoredField::Subjects];
        assert_eq!(subj.with_control_rate, Some(0.5));
        assert_eq!(subj.without_control_rate, Some(1.0));
        assert_eq!(rates[ScoredField::Title].with_control_rate, Some(1.0));
    }

    #[test]
    fn empty_groups_are_absent_not_zero() {
        let rates = availability_by_group(&[]);
        assert_eq!(rates[ScoredField::Title].with_control_rate, None);
        let only_controlled = vec![record(QualityFlag::WithControl, &[], None)];
        let rates = availability_by_group(&only_controlled);
        assert_eq!(rates[ScoredField::Title].with_control_rate, Some(1.0));
        assert_eq!(rates[ScoredField::Title].without_control_rate, None);
    }

    #[test]
    fn controlled_group_rate_equals_derived_importance() {
        let records = vec![
            record(QualityFlag::WithControl, &["a"], None),
            record(QualityFlag::WithControl, &[], None),
            record(QualityFlag::WithControl, &["b"], None),
        ];
        let rates = availability_by_group(&records);
        let importance = derive_importance(&records).unwrap();
        for (field, &value) in importance.iter() {
            assert_eq!(rates[field].with_control_rate, Some(value));
        }
    }

    #[test]
    fn yearly_fraction_and_totals() {
        let records = vec![
            record(QualityFlag::WithControl, &[], Some(2016)),
            record(QualityFlag::WithControl, &[], Some(2016)),
            record(QualityFlag::WithControl, &[], Some(2016)),
            record(QualityFlag::WithoutControl, &[], Some(2016)),
        ];
        let (years, undated) = yearly_control_trend(&records, 10);
        assert_eq!(undated, 0);
        let y2016 = years[&2016];
        assert_eq!(y2016.controlled_fraction, Some(0.75));
        assert_eq!(y2016.total, 4);
        assert!(y2016.low_confidence);
    }

    #[test]
    fn undated_records_are_excluded_and_counted() {
        let records = vec![
            record(QualityFlag::WithControl, &[], None),
            record(QualityFlag::WithoutControl, &[], None),
        ];
        let (years, undated) = yearly_control_trend(&records, 10);
        assert!(years.is_empty());
        assert_eq!(undated, 2);
    }

    #[test]
    fn totals_plus_undated_cover_the_input() {
        let records: Vec<OerRecord> = (0..25)
            .map(|i| {
                record(
                    if i % 2 == 0 {
                        QualityFlag::WithControl
                    } else {
                        QualityFlag::WithoutControl
                    },
                    &[],
                    (i % 5 != 0).then_some(2015 + i % 4),
                )
            })
            .collect();
        let (years, undated) = yearly_control_trend(&records, 10);
        let dated: usize = years.values().map(|s| s.total).sum();
        assert_eq!(dated + undated, records.len());
    }

    #[test]
    fn unknown_flags_count_in_totals_but_not_fraction() {
        let mut records = vec![
            record(QualityFlag::WithControl, &[], Some(2018)),
            record(QualityFlag::Unknown, &[], Some(2018)),
        ];
        let (years, _) = yearly_control_trend(&records, 10);
        assert_eq!(years[&2018].total, 2);
        assert_eq!(years[&2018].controlled_fraction, Some(1.0));
        records.retain(|r| r.quality_flag == QualityFlag::Unknown);
        let (years, _) = yearly_control_trend(&records, 10);
        assert_eq!(years[&2018].controlled_fraction, None);
    }

    #[test]
    fn date_available_is_the_fallback() {
        let mut r = record(QualityFlag::WithControl, &[], None);
        r.date_available = IsoDate::new(2017, 1, 1);
        let (years, undated) = yearly_control_trend(&[r], 10);
        assert_eq!(undated, 0);
        assert!(years.contains_key(&2017));
    }

    #[test]
    fn csv_outputs_have_expected_shape() {
        let records = vec![
            record(QualityFlag::WithControl, &["s"], Some(2016)),
            record(QualityFlag::WithoutControl, &[], Some(2019)),
        ];
        let report = analyze(&records);
        let mut avail = Vec::new();
        report.write_availability_csv(&mut avail).unwrap();
        let avail = String::from_utf8(avail).unwrap();
        assert!(avail.starts_with("field,with_control_rate,without_control_rate\n"));
        assert_eq!(avail.lines().count(), 8); // header + 7 fields

        let mut yearly = Vec::new();
        report.write_yearly_csv(&mut yearly).unwrap();
        let yearly = String::from_utf8(yearly).unwrap();
        assert!(yearly.contains("2016"));
        assert!(yearly.contains("2019"));
    }
}
