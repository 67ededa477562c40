//! Stratified train/test splitting and classification metrics.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{FeatureVector, ForestModel};
use crate::record::QualityFlag;
use crate::rng::SplitMix64;

/// Splits items into train and test partitions, preserving per-class
/// proportions. Each class is shuffled with the seeded generator, then its
/// first `floor(train_fraction * class_size)` items go to the training set.
///
/// Items must all be labeled `WithControl` or `WithoutControl`; exclude
/// unknown-flag records beforehand.
pub fn stratified_split<T: Clone>(
    items: &[T],
    class_of: impl Fn(&T) -> QualityFlag,
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<T>, Vec<T>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidFraction(train_fraction));
    }
    let mut by_class: [Vec<&T>; 2] = [Vec::new(), Vec::new()];
    for item in items {
        match class_of(item) {
            QualityFlag::WithControl => by_class[0].push(item),
            QualityFlag::WithoutControl => by_class[1].push(item),
            QualityFlag::Unknown => return Err(Error::UnknownFlag),
        }
    }
    if by_class[0].is_empty() || by_class[1].is_empty() {
        return Err(Error::DegenerateTrainingSet);
    }
    let mut rng = SplitMix64::new(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class_items in &mut by_class {
        rng.shuffle(class_items);
        let cut = (train_fraction * class_items.len() as f64).floor() as usize;
        train.extend(class_items[..cut].iter().map(|item| (*item).clone()));
        test.extend(class_items[cut..].iter().map(|item| (*item).clone()));
    }
    Ok((train, test))
}

/// Precision, recall, and F1 for one class, with the zero-denominator
/// convention that an undefined metric is 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Metrics per class, keyed by quality flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerClassMetrics {
    pub with_control: ClassMetrics,
    pub without_control: ClassMetrics,
}

/// Classification report: confusion matrix (rows = true class, columns =
/// predicted; order with control, without control), accuracy, and per-class
/// precision/recall/F1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub confusion: [[usize; 2]; 2],
    pub accuracy: f64,
    pub per_class: PerClassMetrics,
    pub test_count: usize,
}

fn class_index(flag: QualityFlag) -> Result<usize> {
    match flag {
        QualityFlag::WithControl => Ok(0),
        QualityFlag::WithoutControl => Ok(1),
        QualityFlag::Unknown => Err(Error::UnknownFlag),
    }
}

fn metrics_for(confusion: &[[usize; 2]; 2], class: usize) -> ClassMetrics {
    let tp = confusion[class][class];
    let fp = confusion[1 - class][class];
    let fn_ = confusion[class][1 - class];
    let precision = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fn_ == 0 {
        0.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    ClassMetrics {
        precision,
        recall,
        f1,
    }
}

/// Builds an [`EvalReport`] from a confusion matrix.
pub fn report_from_confusion(confusion: [[usize; 2]; 2]) -> Result<EvalReport> {
    let test_count: usize = confusion.iter().flatten().sum();
    if test_count == 0 {
        return Err(Error::EmptyTestSet);
    }
    let accuracy = (confusion[0][0] + confusion[1][1]) as f64 / test_count as f64;
    Ok(EvalReport {
        confusion,
        accuracy,
        per_class: PerClassMetrics {
            with_control: metrics_for(&confusion, 0),
            without_control: metrics_for(&confusion, 1),
        },
        test_count,
    })
}

/// Runs the model over a labeled test set and computes the report.
pub fn evaluate(
    model: &ForestModel,
    test_features: &[FeatureVector],
    test_labels: &[QualityFlag],
) -> Result<EvalReport> {
    if test_features.len() != test_labels.len() {
        return Err(Error::LengthMismatch {
            features: test_features.len(),
            labels: test_labels.len(),
        });
    }
    if test_features.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let mut confusion = [[0usize; 2]; 2];
    for (features, label) in test_features.iter().zip(test_labels) {
        let truth = class_index(*label)?;
        let predicted = class_index(model.predict(features).label)?;
        confusion[truth][predicted] += 1;
    }
    report_from_confusion(confusion)
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<18} {:>14} {:>18}",
            "", "pred: with", "pred: without"
        )?;
        writeln!(
            f,
            "{:<18} {:>14} {:>18}",
            "true: with", self.confusion[0][0], self.confusion[0][1]
        )?;
        writeln!(
            f,
            "{:<18} {:>14} {:>18}",
            "true: without", self.confusion[1][0], self.confusion[1][1]
        )?;
        writeln!(f)?;
        writeln!(
            f,
            "accuracy: {:.4} on {} test records",
            self.accuracy, self.test_count
        )?;
        writeln!(
            f,
            "{:<18} {:>9} {:>9} {:>9}",
            "class", "precision", "recall", "f1"
        )?;
        let rows = [
            ("with control", self.per_class.with_control),
            ("without control", self.per_class.without_control),
        ];
        for (name, m) in rows {
            writeln!(
                f,
                "{:<18} {:>9.3} {:>9.3} {:>9.3}",
                name, m.precision, m.recall, m.f1
            )?;
        }
        Ok(())
    }
}
