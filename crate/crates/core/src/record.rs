//! The OER record schema and the presence/length semantics of its fields.
//!
//! Every downstream module (benchmark derivation, scoring, feature
//! extraction, analysis) reads records exclusively through
//! [`OerRecord::field_present`] and [`OerRecord::field_length`], so the
//! definition of "present" and "length" lives here and nowhere else.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::fields::{LengthField, ScoredField};

/// Whether a record went through manual quality control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum QualityFlag {
    #[serde(rename = "with control")]
    WithControl,
    #[serde(rename = "without control")]
    WithoutControl,
    #[serde(rename = "unknown")]
    #[default]
    Unknown,
}

impl QualityFlag {
    /// Parses the quality-control column. Matching is case-insensitive;
    /// anything other than "with control" / "without control" (including a
    /// missing value) maps to [`QualityFlag::Unknown`].
    pub fn parse(value: Option<&str>) -> Self {
        match value.map(|v| v.trim().to_ascii_lowercase()).as_deref() {
            Some("with control") => QualityFlag::WithControl,
            Some("without control") => QualityFlag::WithoutControl,
            _ => QualityFlag::Unknown,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            QualityFlag::WithControl => "with control",
            QualityFlag::WithoutControl => "without control",
            QualityFlag::Unknown => "unknown",
        }
    }
}

impl fmt::Display for QualityFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A calendar date, kept only as precisely as the yearly-trend analysis
/// needs. Parses ISO-8601 dates and the date part of ISO-8601 date-times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IsoDate {
    year: i32,
    month: u8,
    day: u8,
}

impl IsoDate {
    pub fn new(year: i32, month: u8, day: u8) -> Option<Self> {
        if !(1..=9999).contains(&year) || month == 0 || month > 12 {
            return None;
        }
        if day == 0 || day > days_in_month(year, month) {
            return None;
        }
        Some(Self { year, month, day })
    }

    pub fn year(self) -> i32 {
        self.year
    }
}

fn days_in_month(year: i32, month: u8) -> u8 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 => {
            let leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
            if leap {
                29
            } else {
                28
            }
        }
        _ => 0,
    }
}

impl FromStr for IsoDate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        // Keep only the date part of a date-time ("2016-05-01T10:00:00Z").
        let date_part = s.split(['T', ' ']).next().unwrap_or("");
        let mut parts = date_part.split('-');
        let (y, m, d) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(y), Some(m), Some(d), None) => (y, m, d),
            _ => return Err(format!("`{s}` is not an ISO-8601 date")),
        };
        let year: i32 = y.parse().map_err(|_| format!("bad year in `{s}`"))?;
        let month: u8 = m.parse().map_err(|_| format!("bad month in `{s}`"))?;
        let day: u8 = d.parse().map_err(|_| format!("bad day in `{s}`"))?;
        IsoDate::new(year, month, day).ok_or_else(|| format!("`{s}` is out of range"))
    }
}

impl fmt::Display for IsoDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}-{:02}", self.year, self.month, self.day)
    }
}

/// One OER's metadata plus its quality-control label.
///
/// Invariants maintained by the ingestion layer: text fields are stored
/// trimmed, lists are never null (absent means empty), and optional text
/// fields are `None` rather than `Some("")`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OerRecord {
    pub url: String,
    pub title: String,
    pub description: String,
    pub material_type: String,
    pub date_available: Option<IsoDate>,
    pub date_issued: Option<IsoDate>,
    pub subjects: Vec<String>,
    pub level: Option<String>,
    pub languages: Vec<String>,
    pub time_required: Option<String>,
    pub accessibilities: Vec<String>,
    pub quality_flag: QualityFlag,
}

impl OerRecord {
    /// Whether the record has a value for the given scored field.
    ///
    /// Text fields count as present when non-empty after trimming; list
    /// fields when they contain at least one non-empty element; optional
    /// fields when set and non-empty after trimming.
    pub fn field_present(&self, field: ScoredField) -> bool {
        fn some_text(s: &str) -> bool {
            !s.trim().is_empty()
        }
        fn some_element(list: &[String]) -> bool {
            list.iter().any(|s| some_text(s))
        }
        match field {
            ScoredField::Title => some_text(&self.title),
            ScoredField::Description => some_text(&self.description),
            ScoredField::Subjects => some_element(&self.subjects),
            ScoredField::Level => self.level.as_deref().is_some_and(some_text),
            ScoredField::Language => some_element(&self.languages),
            ScoredField::TimeRequired => self.time_required.as_deref().is_some_and(some_text),
            ScoredField::Accessibilities => some_element(&self.accessibilities),
        }
    }

    /// Length of a length-rated field: whitespace-separated word count for
    /// title and description, count of non-empty entries for subjects. An
    /// absent field has length 0.
    pub fn field_length(&self, field: LengthField) -> usize {
        match field {
            LengthField::Title => self.title.split_whitespace().count(),
            LengthField::Description => self.description.split_whitespace().count(),
            LengthField::Subjects => self
                .subjects
                .iter()
                .filter(|s| !s.trim().is_empty())
                .count(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> OerRecord {
        OerRecord {
            url: "https://example.org/oer/1".into(),
            title: "Intro to Nursing".into(),
            ..OerRecord::default()
        }
    }

    #[test]
    fn presence_of_text_fields() {
        let r = record();
        assert!(r.field_present(ScoredField::Title));
        assert!(!r.field_present(ScoredField::Description));
    }

    #[test]
    fn empty_list_is_absent() {
        let r = record();
        assert!(!r.field_present(ScoredField::Subjects));
        let mut r = r;
        r.subjects = vec!["".into(), "  ".into()];
        assert!(!r.field_present(ScoredField::Subjects));
        r.subjects.push("nursing".into());
        assert!(r.field_present(ScoredField::Subjects));
    }

    #[test]
    fn whitespace_only_level_is_absent() {
        // Oracle for the trimming rule: trim, then test emptiness.
        let trim_oracle = |s: &str| !s.trim().is_empty();
        let mut r = record();
        r.level = Some("  ".into());
        assert_eq!(r.field_present(ScoredField::Level), trim_oracle("  "));
        assert!(!r.field_present(ScoredField::Level));
        r.level = Some("Beginner".into());
        assert!(r.field_present(ScoredField::Level));
    }

    #[test]
    fn word_count_lengths() {
        let mut r = record();
        r.title = "Health Care Basics".into();
        assert_eq!(r.field_length(LengthField::Title), 3);
        r.description = "".into();
        assert_eq!(r.field_length(LengthField::Description), 0);
    }

    #[test]
    fn subject_length_counts_non_empty_entries() {
        // Oracle: filter empties, then count.
        let entries = vec!["nursing".to_string(), "".to_string(), "anatomy".to_string()];
        let oracle = entries.iter().filter(|s| !s.trim().is_empty()).count();
        let mut r = record();
        r.subjects = entries;
        assert_eq!(r.field_length(LengthField::Subjects), oracle);
        assert_eq!(r.field_length(LengthField::Subjects), 2);
    }

    #[test]
    fn length_ignores_surrounding_whitespace() {
        let mut a = record();
        a.title = "Health Care Basics".into();
        let mut b = record();
        b.title = "  Health \u{00a0} Care Basics \n".into();
        assert_eq!(
            a.field_length(LengthField::Title),
            b.field_length(LengthField::Title)
        );
    }

    #[test]
    fn absent_implies_zero_length() {
        let r = OerRecord::default();
        for field in LengthField::ALL {
            assert!(!r.field_present(field.into()));
            assert_eq!(r.field_length(field), 0);
        }
    }

    #[test]
    fn quality_flag_parsing() {
        assert_eq!(
            QualityFlag::parse(Some("With Control")),
            QualityFlag::WithControl
        );
        assert_eq!(
            QualityFlag::parse(Some(" WITHOUT CONTROL ")),
            QualityFlag::WithoutControl
        );
        assert_eq!(QualityFlag::parse(Some("maybe")), QualityFlag::Unknown);
        assert_eq!(QualityFlag::parse(None), QualityFlag::Unknown);
    }

    #[test]
    fn iso_date_parsing() {
        assert_eq!(
            "2016-05-01".parse::<IsoDate>().unwrap(),
            IsoDate::new(2016, 5, 1).unwrap()
        );
        assert_eq!(
            "2016-05-01T10:00:00Z".parse::<IsoDate>().unwrap().year(),
            2016
        );
        assert!("2016-13-01".parse::<IsoDate>().is_err());
        assert!("2015-02-29".parse::<IsoDate>().is_err());
        assert!("2016-02-29".parse::<IsoDate>().is_ok());
        assert!("not a date".parse::<IsoDate>().is_err());
        assert_eq!(IsoDate::new(2019, 7, 4).unwrap().to_string(), "2019-07-04");
    }
}
