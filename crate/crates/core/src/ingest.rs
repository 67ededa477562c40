//! Parsing OER metadata datasets from JSON-lines and CSV files.
//!
//! Malformed entries never abort a parse; they land in
//! [`IngestReport::rejected`] with the entry index and a reason. A record
//! with an unparseable date is kept (the date degrades to absent) and noted
//! in [`IngestReport::warnings`].
//!
//! The canonical interchange format is JSON-lines with the keys `url`,
//! `title`, `description`, `material_type`, `date_available`, `date_issued`,
//! `subjects` (array), `level`, `languages` (array), `time_required`,
//! `accessibilities` (array), and `quality_control`. CSV uses the same names
//! as headers, with list cells delimited by `|`.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::record::{OerRecord, QualityFlag};

/// Supported dataset formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    JsonLines,
    Csv,
}

/// Outcome of parsing one dataset.
#[derive(Debug, Clone)]
pub struct IngestReport {
    pub records: Vec<OerRecord>,
    pub rejected: Vec<Rejection>,
    pub warnings: Vec<FieldWarning>,
    pub source: String,
}

/// An entry that could not be turned into a record. `index` is the 1-based
/// line number (JSON-lines) or data-row number (CSV).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Rejection {
    pub index: usize,
    pub reason: String,
}

/// A field that was dropped from an otherwise valid record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldWarning {
    pub index: usize,
    pub field: String,
    pub reason: String,
}

impl IngestReport {
    pub fn summary(&self) -> DatasetSummary {
        dataset_summary(&self.records)
    }
}

/// Record counts per quality flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub total: usize,
    pub with_control: usize,
    pub without_control: usize,
    pub unknown: usize,
}

pub fn dataset_summary(records: &[OerRecord]) -> DatasetSummary {
    let mut summary = DatasetSummary {
        total: records.len(),
        with_control: 0,
        without_control: 0,
        unknown: 0,
    };
    for record in records {
        match record.quality_flag {
            QualityFlag::WithControl => summary.with_control += 1,
            QualityFlag::WithoutControl => summary.without_control += 1,
            QualityFlag::Unknown => summary.unknown += 1,
        }
    }
    summary
}

/// The wire-level shape of one entry. All keys are optional on input;
/// missing keys become empty or absent values per the record invariants.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RawRecord {
    #[serde(default)]
    pub url: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub material_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date_available: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date_issued: Option<String>,
    #[serde(default)]
    pub subjects: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<String>,
    #[serde(default)]
    pub languages: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_required: Option<String>,
    #[serde(default)]
    pub accessibilities: Vec<String>,
    #[serde(default)]
    pub quality_control: Option<String>,
}

impl RawRecord {
    /// Validates and normalizes into an [`OerRecord`]: text trimmed, empty
    /// optionals collapsed to `None`, dates parsed (failures degrade to
    /// absent and are reported back).
    pub fn into_record(self, index: usize, warnings: &mut Vec<FieldWarning>) -> OerRecord {
        let mut parse_date = |name: &str, value: Option<String>| {
            let text = value?;
            let text = text.trim();
            if text.is_empty() {
                return None;
            }
            match text.parse() {
                Ok(date) => Some(date),
                Err(reason) => {
                    warnings.push(FieldWarning {
                        index,
                        field: name.to_string(),
                        reason,
                    });
                    None
                }
            }
        };
        let date_available = parse_date("date_available", self.date_available);
        let date_issued = parse_date("date_issued", self.date_issued);

        fn opt_text(value: Option<String>) -> Option<String> {
            value
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
        }
        fn list(values: Vec<String>) -> Vec<String> {
            values.into_iter().map(|v| v.trim().to_string()).collect()
        }

        OerRecord {
            url: self.url.trim().to_string(),
            title: self.title.trim().to_string(),
            description: self.description.trim().to_string(),
            material_type: self.material_type.trim().to_string(),
            date_available,
            date_issued,
            subjects: list(self.subjects),
            level: opt_text(self.level),
            languages: list(self.languages),
            time_required: opt_text(self.time_required),
            accessibilities: list(self.accessibilities),
            quality_flag: QualityFlag::parse(self.quality_control.as_deref()),
        }
    }

    pub fn from_record(record: &OerRecord) -> Self {
        Self {
            url: record.url.clone(),
            title: record.title.clone(),
            description: record.description.clone(),
            material_type: record.material_type.clone(),
            date_available: record.date_available.map(|d| d.to_string()),
            date_issued: record.date_issued.map(|d| d.to_string()),
            subjects: record.subjects.clone(),
            level: record.level.clone(),
            languages: record.languages.clone(),
            time_required: record.time_required.clone(),
            accessibilities: record.accessibilities.clone(),
            quality_control: Some(record.quality_flag.as_str().to_string()),
        }
    }
}

/// Parses a dataset. Fatal errors are limited to an unreadable or
/// non-UTF-8 stream; everything else degrades per entry.
pub fn parse_dataset<R: Read>(input: R, format: Format, source: &str) -> Result<IngestReport> {
    match format {
        Format::JsonLines => parse_jsonl(input, source),
        Format::Csv => parse_csv(input, source),
    }
}

fn parse_jsonl<R: Read>(input: R, source: &str) -> Result<IngestReport> {
    let reader = BufReader::new(input);
    let mut report = IngestReport {
        records: Vec::new(),
        rejected: Vec::new(),
        warnings: Vec::new(),
        source: source.to_string(),
    };
    for (line_no, line) in reader.lines().enumerate() {
        let index = line_no + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<RawRecord>(&line) {
            Ok(raw) => {
                let record = raw.into_record(index, &mut report.warnings);
                report.records.push(record);
            }
            Err(err) => report.rejected.push(Rejection {
                index,
                reason: err.to_string(),
            }),
        }
    }
    Ok(report)
}

const CSV_COLUMNS: [&str; 12] = [
    "url",
    "title",
    "description",
    "material_type",
    "date_available",
    "date_issued",
    "subjects",
    "level",
    "languages",
    "time_required",
    "accessibilities",
    "quality_control",
];

fn parse_csv<R: Read>(input: R, source: &str) -> Result<IngestReport> {
    let mut reader = csv::ReaderBuilder::new().flexible(false).from_reader(input);
    let headers = reader.headers().map_err(csv_io)?.clone();
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    let positions: Vec<Option<usize>> = CSV_COLUMNS.iter().map(|c| column(c)).collect();

    let mut report = IngestReport {
        records: Vec::new(),
        rejected: Vec::new(),
        warnings: Vec::new(),
        source: source.to_string(),
    };
    for (row_no, row) in reader.records().enumerate() {
        let index = row_no + 1;
        match row {
            Ok(row) => {
                let cell = |col: usize| positions[col].and_then(|p| row.get(p)).unwrap_or("");
                let opt_cell = |col: usize| {
                    let v = cell(col);
                    (!v.trim().is_empty()).then(|| v.to_string())
                };
                let raw = RawRecord {
                    url: cell(0).to_string(),
                    title: cell(1).to_string(),
                    description: cell(2).to_string(),
                    material_type: cell(3).to_string(),
                    date_available: opt_cell(4),
                    date_issued: opt_cell(5),
                    subjects: split_list(cell(6)),
                    level: opt_cell(7),
                    languages: split_list(cell(8)),
                    time_required: opt_cell(9),
                    accessibilities: split_list(cell(10)),
                    quality_control: opt_cell(11),
                };
                let record = raw.into_record(index, &mut report.warnings);
                report.records.push(record);
            }
            Err(err) => {
                if err.is_io_error() {
                    return Err(csv_io(err));
                }
                report.rejected.push(Rejection {
                    index,
                    reason: err.to_string(),
                });
            }
        }
    }
    Ok(report)
}

fn csv_io(err: csv::Error) -> crate::error::Error {
    match err.into_kind() {
        csv::ErrorKind::Io(io_err) => io_err.into(),
        other => std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{other:?}")).into(),
    }
}

/// Splits a `|`-delimited CSV list cell. An empty cell is an empty list.
fn split_list(cell: &str) -> Vec<String> {
    if cell.trim().is_empty() {
        return Vec::new();
    }
    cell.split('|').map(|s| s.trim().to_string()).collect()
}

fn join_list(values: &[String]) -> String {
    values.join("|")
}

/// Writes records in the canonical JSON-lines format, one object per line.
pub fn write_jsonl<W: Write>(records: &[OerRecord], mut writer: W) -> Result<()> {
    for record in records {
        let raw = RawRecord::from_record(record);
        serde_json::to_writer(&mut writer, &raw)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Writes records as CSV with the canonical header row.
pub fn write_csv<W: Write>(records: &[OerRecord], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(CSV_COLUMNS).map_err(csv_io)?;
    for record in records {
        let raw = RawRecord::from_record(record);
        out.write_record([
            raw.url.as_str(),
            raw.title.as_str(),
            raw.description.as_str(),
            raw.material_type.as_str(),
            raw.date_available.as_deref().unwrap_or(""),
            raw.date_issued.as_deref().unwrap_or(""),
            &join_list(&raw.subjects),
            raw.level.as_deref().unwrap_or(""),
            &join_list(&raw.languages),
            raw.time_required.as_deref().unwrap_or(""),
            &join_list(&raw.accessibilities),
            raw.quality_control.as_deref().unwrap_or("unknown"),
        ])
        .map_err(csv_io)?;
    }
    out.flush()?;
    Ok(())
}
