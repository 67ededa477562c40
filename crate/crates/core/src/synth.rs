//! Synthetic corpus generation for tests, benches, and demos.
//!
//! [`two_regime_corpus`] produces records in two regimes: a high regime
//! mimicking quality-controlled resources (fields almost always present,
//! lengths near the reference means) and a low regime with sparse,
//! erratically sized metadata. The regimes carry the matching quality flags,
//! so the corpus is directly usable for training and evaluation.

use crate::record::{IsoDate, OerRecord, QualityFlag};
use crate::rng::SplitMix64;

const LEVELS: [&str; 3] = ["Beginner", "Intermediate", "Advanced"];
const LANGUAGES: [&str; 4] = ["en", "es", "fr", "de"];
const ACCESSIBILITIES: [&str; 3] = ["captions", "transcript", "audio description"];
const MATERIAL_TYPES: [&str; 4] = ["Course", "Text", "Video", "Assessment"];
const WORDS: [&str; 12] = [
    "health", "care", "nursing", "systems", "network", "security", "data", "basics",
    "advanced", "clinical", "practice", "information",
];

fn words(rng: &mut SplitMix64, count: usize) -> String {
    (0..count)
        .map(|_| WORDS[rng.below(WORDS.len() as u64) as usize])
        .collect::<Vec<_>>()
        .join(" ")
}

/// Approximate normal draw via the sum of uniforms (Irwin-Hall with 12
/// terms), scaled to the requested mean and standard deviation.
fn normal_ish(rng: &mut SplitMix64, mean: f64, std: f64) -> f64 {
    let sum: f64 = (0..12).map(|_| rng.next_f64()).sum();
    mean + (sum - 6.0) * std
}

fn length_near(rng: &mut SplitMix64, mean: f64, std: f64, max: usize) -> usize {
    (normal_ish(rng, mean, std).round() as i64).clamp(1, max as i64) as usize
}

fn pick<'a>(rng: &mut SplitMix64, options: &[&'a str]) -> &'a str {
    options[rng.below(options.len() as u64) as usize]
}

fn subjects(rng: &mut SplitMix64, count: usize) -> Vec<String> {
    (0..count)
        .map(|_| format!("{} {}", pick(rng, &WORDS), pick(rng, &WORDS)))
        .collect()
}

fn high_record(rng: &mut SplitMix64, index: usize) -> OerRecord {
    // Each field present with probability drawn from [0.9, 1.0].
    let mut present = || {
        let p = 0.9 + 0.1 * rng.next_f64();
        rng.next_f64() < p
    };
    let has_title = present();
    let has_description = present();
    let has_subjects = present();
    let has_level = present();
    let has_language = present();
    let has_time = present();
    let has_access = present();
    OerRecord {
        url: format!("https://synth.example/high/{index}"),
        title: if has_title {
            let len = length_near(rng, 5.5, 2.5, 20);
            words(rng, len)
        } else {
            String::new()
        },
        description: if has_description {
            let len = length_near(rng, 54.5, 40.0, 200);
            words(rng, len)
        } else {
            String::new()
        },
        material_type: pick(rng, &MATERIAL_TYPES).to_string(),
        date_available: None,
        date_issued: IsoDate::new(
            2015 + (rng.below(5) as i32),
            1 + rng.below(12) as u8,
            1 + rng.below(28) as u8,
        ),
        subjects: if has_subjects {
            let len = length_near(rng, 4.5, 3.5, 12);
            subjects(rng, len)
        } else {
            Vec::new()
        },
        level: has_level.then(|| pick(rng, &LEVELS).to_string()),
        languages: if has_language {
            vec![pick(rng, &LANGUAGES).to_string()]
        } else {
            Vec::new()
        },
        time_required: has_time.then(|| format!("{} weeks", 1 + rng.below(12))),
        accessibilities: if has_access {
            vec![pick(rng, &ACCESSIBILITIES).to_string()]
        } else {
            Vec::new()
        },
        quality_flag: QualityFlag::WithControl,
    }
}

fn low_record(rng: &mut SplitMix64, index: usize) -> OerRecord {
    // Each field present with probability drawn from [0.3, 0.6].
    let mut present = || {
        let p = 0.3 + 0.3 * rng.next_f64();
        rng.next_f64() < p
    };
    let has_title = present();
    let has_description = present();
    let has_subjects = present();
    let has_level = present();
    let has_language = present();
    let has_time = present();
    let has_access = present();
    OerRecord {
        url: format!("https://synth.example/low/{index}"),
        title: if has_title {
            let len = 1 + rng.below(25) as usize;
            words(rng, len)
        } else {
            String::new()
        },
        description: if has_description {
            let len = 1 + rng.below(160) as usize;
            words(rng, len)
        } else {
            String::new()
        },
        material_type: pick(rng, &MATERIAL_TYPES).to_string(),
        date_available: None,
        date_issued: IsoDate::new(
            2015 + (rng.below(5) as i32),
            1 + rng.below(12) as u8,
            1 + rng.below(28) as u8,
        ),
        subjects: if has_subjects {
            let len = 1 + rng.below(15) as usize;
            subjects(rng, len)
        } else {
            Vec::new()
        },
        level: has_level.then(|| pick(rng, &LEVELS).to_string()),
        languages: if has_language {
            vec![pick(rng, &LANGUAGES).to_string()]
        } else {
            Vec::new()
        },
        time_required: has_time.then(|| format!("{} hours", 1 + rng.below(40))),
        accessibilities: if has_access {
            vec![pick(rng, &ACCESSIBILITIES).to_string()]
        } else {
            Vec::new()
        },
        quality_flag: QualityFlag::WithoutControl,
    }
}

/// Generates `n` records, alternating between the high (with-control) and
/// low (without-control) regimes. Deterministic for a given seed.
pub fn two_regime_corpus(n: usize, seed: u64) -> Vec<OerRecord> {
    let mut rng = SplitMix64::new(seed);
    (0..n)
        .map(|i| {
            if i % 2 == 0 {
                high_record(&mut rng, i)
            } else {
                low_record(&mut rng, i)
            }
        })
        .collect()
}
