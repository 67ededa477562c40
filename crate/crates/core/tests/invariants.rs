//! Property tests for the record semantics, ingestion round-trip, benchmark
//! derivation, and scoring invariants.

use proptest::prelude::*;

use oerq_core::benchmark::{derive_importance, normalize_importance, Benchmark};
use oerq_core::fields::{FieldMap, LengthField, ScoredField};
use oerq_core::ingest::{parse_dataset, write_jsonl, Format, RawRecord};
use oerq_core::record::{OerRecord, QualityFlag};
use oerq_core::scoring::{numeric_rating, score_record};
use oerq_core::synth::two_regime_corpus;

fn arb_text() -> impl Strategy<Value = String> {
    prop_oneof![
        Just(String::new()),
        Just("   ".to_string()),
        "[a-z]{1,8}( [a-z]{1,8}){0,9}",
        "\\s{0,2}[a-z]{1,8}( [a-z]{1,8}){0,5}\\s{0,2}",
    ]
}

fn arb_list() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(
        prop_oneof![Just(String::new()), "[a-z]{1,10}", Just(" ".to_string())],
        0..6,
    )
}

fn arb_opt_text() -> impl Strategy<Value = Option<String>> {
    prop::option::of(prop_oneof![
        Just(String::new()),
        "[a-z]{1,12}",
        Just("  ".to_string())
    ])
}

fn arb_date() -> impl Strategy<Value = Option<String>> {
    prop::option::of(prop_oneof![
        (2000i32..2030, 1u8..=12, 1u8..=28)
            .prop_map(|(y, m, d)| format!("{y:04}-{m:02}-{d:02}")),
        Just("not-a-date".to_string()),
    ])
}

prop_compose! {
    fn arb_raw()(
        url in "[a-z]{1,10}",
        title in arb_text(),
        description in arb_text(),
        material_type in arb_text(),
        date_available in arb_date(),
        date_issued in arb_date(),
        subjects in arb_list(),
        level in arb_opt_text(),
        languages in arb_list(),
        time_required in arb_opt_text(),
        accessibilities in arb_list(),
        quality_control in prop::option::of(prop_oneof![
            Just("with control".to_string()),
            Just("Without Control".to_string()),
            Just("garbage".to_string()),
        ]),
    ) -> RawRecord {
        RawRecord {
            url,
            title,
            description,
            material_type,
            date_available,
            date_issued,
            subjects,
            level,
            languages,
            time_required,
            accessibilities,
            quality_control,
        }
    }
}

fn parse_lines(lines: &str) -> Vec<OerRecord> {
    parse_dataset(lines.as_bytes(), Format::JsonLines, "prop")
        .unwrap()
        .records
}

fn derived_benchmark() -> Benchmark {
    let corpus = two_regime_corpus(400, 17);
    let controlled: Vec<OerRecord> = corpus
        .into_iter()
        .filter(|r| r.quality_flag == QualityFlag::WithControl)
        .collect();
    Benchmark::derive(&controlled, "prop-fixture").unwrap()
}

proptest! {
    #[test]
    fn absent_fields_have_zero_length(raw in arb_raw()) {
        let mut warnings = Vec::new();
        let record = raw.into_record(0, &mut warnings);
        for field in LengthField::ALL {
            if !record.field_present(field.into()) {
                prop_assert_eq!(record.field_length(field), 0);
            } else {
                prop_assert!(record.field_length(field) > 0);
            }
        }
    }

    #[test]
    fn length_is_whitespace_insensitive(words in prop::collection::vec("[a-z]{1,6}", 1..10)) {
        let plain = OerRecord { title: words.join(" "), ..OerRecord::default() };
        let padded = OerRecord {
            title: format!("  {}  ", words.join("   ")),
            ..OerRecord::default()
        };
        prop_assert_eq!(
            plain.field_length(LengthField::Title),
            padded.field_length(LengthField::Title)
        );
    }

    #[test]
    fn jsonl_round_trip_is_field_equal(raws in prop::collection::vec(arb_raw(), 0..8)) {
        let lines: String = raws
            .iter()
            .map(|raw| serde_json::to_string(raw).unwrap() + "\n")
            .collect();
        let first = parse_lines(&lines);
        let mut buf = Vec::new();
        write_jsonl(&first, &mut buf).unwrap();
        let second = parse_lines(std::str::from_utf8(&buf).unwrap());
        prop_assert_eq!(first, second);
    }

    #[test]
    fn derived_importance_matches_recount(raws in prop::collection::vec(arb_raw(), 1..40)) {
        let records: Vec<OerRecord> = raws
            .into_iter()
            .map(|mut raw| {
                raw.quality_control = Some("with control".to_string());
                raw.into_record(0, &mut Vec::new())
            })
            .collect();
        let importance = derive_importance(&records).unwrap();
        for field in ScoredField::ALL {
            let mut count = 0usize;
            for record in &records {
                if record.field_present(field) {
                    count += 1;
                }
            }
            prop_assert_eq!(importance[field], count as f64 / records.len() as f64);
        }
    }

    #[test]
    fn normalization_is_scale_invariant(
        values in prop::collection::vec(0.0f64..1.0, 7),
        scale in 0.01f64..100.0,
    ) {
        let importance = FieldMap::from_fn(|f| values[f as usize].max(1e-3));
        let scaled = importance.map(|_, &v| v * scale);
        let a = normalize_importance(&importance).unwrap();
        let b = normalize_importance(&scaled).unwrap();
        for field in ScoredField::ALL {
            prop_assert!((a[field] - b[field]).abs() < 1e-9);
        }
        let sum: f64 = a.values().sum();
        prop_assert!((sum - 1.0).abs() < 1e-9);
        prop_assert!(sum <= 1.0);
    }

    #[test]
    fn rating_values_are_reciprocal_integers(length in 0usize..500, mean in 0.5f64..100.0, std in 0.1f64..50.0) {
        let rating = numeric_rating(length, &oerq_core::LengthDistribution { mean, std });
        if length == 0 {
            prop_assert_eq!(rating, 0.0);
        } else {
            let k = (1.0 / rating).round();
            prop_assert!(k >= 1.0);
            prop_assert!((rating - 1.0 / k).abs() < 1e-12, "rating {rating} not 1/k");
        }
    }

    #[test]
    fn rating_is_non_increasing_in_distance(mean in 1.0f64..60.0, std in 0.5f64..20.0) {
        let dist = oerq_core::LengthDistribution { mean, std };
        let mut previous = f64::INFINITY;
        // Walk lengths outward from the mean on the upper side.
        let start = mean.ceil() as usize;
        for length in start..start + 100 {
            let rating = numeric_rating(length, &dist);
            prop_assert!(rating <= previous + 1e-15);
            previous = rating;
        }
        // Within one standard deviation the rating is exactly 1.
        let inside = mean.ceil() as usize;
        if (inside as f64 - mean).abs() <= std {
            prop_assert_eq!(numeric_rating(inside.max(1), &dist), 1.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scores_are_ordered_and_bounded(raws in prop::collection::vec(arb_raw(), 1..20)) {
        let benchmark = derived_benchmark();
        for raw in raws {
            let record = raw.into_record(0, &mut Vec::new());
            let scores = score_record(&record, &benchmark);
            prop_assert!(scores.normal >= 0.0);
            prop_assert!(scores.normal <= scores.availability);
            prop_assert!(scores.availability <= 1.0, "availability {}", scores.availability);
            for (_, &rating) in scores.per_field_rating.iter() {
                prop_assert!((0.0..=1.0).contains(&rating));
            }
        }
    }

    #[test]
    fn filling_a_field_never_lowers_availability(raw in arb_raw()) {
        let benchmark = derived_benchmark();
        let record = raw.into_record(0, &mut Vec::new());
        let base = score_record(&record, &benchmark).availability;
        for field in ScoredField::ALL {
            if record.field_present(field) {
                continue;
            }
            let mut filled = record.clone();
            match field {
                ScoredField::Title => filled.title = "useful title".into(),
                ScoredField::Description => filled.description = "a description".into(),
                ScoredField::Subjects => filled.subjects = vec!["subject".into()],
                ScoredField::Level => filled.level = Some("Beginner".into()),
                ScoredField::Language => filled.languages = vec!["en".into()],
                ScoredField::TimeRequired => filled.time_required = Some("2 weeks".into()),
                ScoredField::Accessibilities => filled.accessibilities = vec!["captions".into()],
            }
            let grown = score_record(&filled, &benchmark).availability;
            prop_assert!(grown >= base, "field {field}: {grown} < {base}");
        }
    }
}

#[test]
fn normal_equals_availability_when_lengths_sit_within_one_std() {
    let benchmark = derived_benchmark();
    let dist = |f: LengthField| benchmark.distributions[f];
    let title_len = dist(LengthField::Title).mean.round().max(1.0) as usize;
    let desc_len = dist(LengthField::Description).mean.round().max(1.0) as usize;
    let subj_len = dist(LengthField::Subjects).mean.round().max(1.0) as usize;
    let record = OerRecord {
        url: "u".into(),
        title: vec!["w"; title_len].join(" "),
        description: vec!["w"; desc_len].join(" "),
        subjects: (0..subj_len).map(|i| format!("s{i}")).collect(),
        level: Some("Beginner".into()),
        languages: vec!["en".into()],
        time_required: Some("1 week".into()),
        accessibilities: vec!["captions".into()],
        quality_flag: QualityFlag::Unknown,
        ..OerRecord::default()
    };
    for field in LengthField::ALL {
        let d = dist(field);
        assert!((record.field_length(field) as f64 - d.mean).abs() <= d.std);
    }
    let scores = score_record(&record, &benchmark);
    assert_eq!(scores.normal, scores.availability);
    // All seven fields present under a derived benchmark: weights sum to 1.
    assert!((scores.availability - 1.0).abs() < 1e-9);

    // The feature vector of the same record: both scores carried over
    // bit-for-bit, level available, lengths as counted.
    let features = oerq_core::extract_features(&record, &benchmark);
    assert_eq!(features.availability_score, scores.availability);
    assert_eq!(features.normal_score, scores.normal);
    assert!(features.level_available);
    assert_eq!(features.title_length as usize, title_len);
    assert_eq!(features.description_length as usize, desc_len);
    assert_eq!(features.subjects_length as usize, subj_len);
}
