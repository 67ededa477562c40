//! From-scratch random forest over the six metadata-derived features,
//! predicting whether a record would pass quality control.
//!
//! Trees are grown on bootstrap samples with random feature subsampling and
//! Gini-impurity split selection. Training is deterministic: every tree
//! draws from its own [`SplitMix64`] stream seeded with
//! `params.seed ^ tree_index`, the first `n` draws of which are the
//! bootstrap indices (`below(n)` each), so serial and parallel construction
//! produce bit-identical models.
//!
//! Split thresholds are midpoints between consecutive distinct sorted
//! values (clamped to the lower value when rounding would reach the upper);
//! ties in impurity are broken by lower feature index, then lower
//! threshold. Feature importance is the total impurity decrease attributed
//! to each feature across all trees, normalized to sum to 1.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use std::io::{Read, Write};

use crate::benchmark::Benchmark;
use crate::error::{Error, Result};
use crate::fields::{LengthField, ScoredField};
use crate::record::{OerRecord, QualityFlag};
use crate::rng::SplitMix64;
use crate::scoring;

/// Number of classifier features.
pub const FEATURE_COUNT: usize = 6;

/// Feature names in their fixed order.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "availability_score",
    "normal_score",
    "level_available",
    "description_length",
    "title_length",
    "subjects_length",
];

/// Current model file format version.
pub const MODEL_VERSION: u32 = 1;

/// The six classifier inputs, in their fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub availability_score: f64,
    pub normal_score: f64,
    pub level_available: bool,
    pub description_length: u32,
    pub title_length: u32,
    pub subjects_length: u32,
}

impl FeatureVector {
    /// The vector as ordered numeric columns, the form the trees split on.
    pub fn as_array(&self) -> [f64; FEATURE_COUNT] {
        [
            self.availability_score,
            self.normal_score,
            if self.level_available { 1.0 } else { 0.0 },
            f64::from(self.description_length),
            f64::from(self.title_length),
            f64::from(self.subjects_length),
        ]
    }
}

/// Computes the feature vector of one record against a benchmark.
pub fn extract_features(record: &OerRecord, benchmark: &Benchmark) -> FeatureVector {
    FeatureVector {
        availability_score: scoring::availability_score(record, benchmark),
        normal_score: scoring::normal_score(record, benchmark),
        level_available: record.field_present(ScoredField::Level),
        description_length: record.field_length(LengthField::Description) as u32,
        title_length: record.field_length(LengthField::Title) as u32,
        subjects_length: record.field_length(LengthField::Subjects) as u32,
    }
}

/// Gini impurity of a two-class node: `1 - p0^2 - p1^2`.
pub fn gini_impurity(class_counts: [usize; 2]) -> Result<f64> {
    let total = class_counts[0] + class_counts[1];
    if total == 0 {
        return Err(Error::EmptyNode);
    }
    Ok(gini(class_counts))
}

fn gini(counts: [usize; 2]) -> f64 {
    let total = (counts[0] + counts[1]) as f64;
    debug_assert!(total > 0.0);
    let p0 = counts[0] as f64 / total;
    let p1 = counts[1] as f64 / total;
    1.0 - p0 * p0 - p1 * p1
}

/// Forest hyperparameters. The defaults are 100 trees, unlimited depth,
/// single-sample leaves, and 2 features per split (⌊√6⌋).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestHyperparams {
    pub tree_count: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub features_per_split: usize,
    pub seed: u64,
}

impl Default for ForestHyperparams {
    fn default() -> Self {
        Self {
            tree_count: 100,
            max_depth: None,
            min_samples_leaf: 1,
            features_per_split: 2,
            seed: 0,
        }
    }
}

impl ForestHyperparams {
    fn validate(&self) -> Result<()> {
        if self.tree_count == 0 {
            return Err(Error::InvalidHyperparams("tree_count must be >= 1".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::InvalidHyperparams(
                "min_samples_leaf must be >= 1".into(),
            ));
        }
        if self.features_per_split == 0 || self.features_per_split > FEATURE_COUNT {
            return Err(Error::InvalidHyperparams(format!(
                "features_per_split must lie in 1..={FEATURE_COUNT}"
            )));
        }
        if self.max_depth == Some(0) {
            return Err(Error::InvalidHyperparams(
                "max_depth must be >= 1 when set".into(),
            ));
        }
        Ok(())
    }
}

/// One node of a decision tree. Internal nodes route on
/// `value[feature] <= threshold`; leaves carry the training class counts
/// (`[with_control, without_control]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        counts: [usize; 2],
    },
}

impl TreeNode {
    fn vote(&self, values: &[f64; FEATURE_COUNT]) -> usize {
        match self {
            // Tie goes to the without-control class: a quality gate fails
            // closed.
            TreeNode::Leaf { counts } => usize::from(counts[0] <= counts[1]),
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if values[*feature] <= *threshold {
                    left.vote(values)
                } else {
                    right.vote(values)
                }
            }
        }
    }

    fn has_split(&self) -> bool {
        matches!(self, TreeNode::Split { .. })
    }
}

/// A trained forest plus its Gini feature importances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub version: u32,
    pub hyperparams: ForestHyperparams,
    pub class_labels: [QualityFlag; 2],
    pub feature_order: Vec<String>,
    pub trees: Vec<TreeNode>,
    pub feature_importance: Vec<f64>,
}

/// Outcome of classifying one feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: QualityFlag,
    pub vote_fraction: f64,
}

impl ForestModel {
    /// Majority vote across the trees. An exact tie goes to
    /// [`QualityFlag::WithoutControl`].
    pub fn predict(&self, features: &FeatureVector) -> Prediction {
        let values = features.as_array();
        let with_control_votes = self
            .trees
            .iter()
            .filter(|tree| tree.vote(&values) == 0)
            .count();
        let total = self.trees.len();
        let without_control_votes = total - with_control_votes;
        let (label, winning) = if with_control_votes > without_control_votes {
            (QualityFlag::WithControl, with_control_votes)
        } else {
            (QualityFlag::WithoutControl, without_control_votes)
        };
        Prediction {
            label,
            vote_fraction: winning as f64 / total as f64,
        }
    }

    /// Whether any tree contains at least one split. When none does, the
    /// stored importances are the uniform fallback and should be read with
    /// that caveat.
    pub fn has_splits(&self) -> bool {
        self.trees.iter().any(TreeNode::has_split)
    }

    /// Feature importances in descending order.
    pub fn ranked_importance(&self) -> Vec<(&'static str, f64)> {
        let mut ranked: Vec<(&'static str, f64)> = FEATURE_NAMES
            .iter()
            .zip(&self.feature_importance)
            .map(|(name, &value)| (*name, value))
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        ranked
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let model: ForestModel = serde_json::from_reader(reader)?;
        if model.version != MODEL_VERSION {
            return Err(Error::UnsupportedModelVersion(model.version));
        }
        if model.feature_order != FEATURE_NAMES {
            return Err(Error::InvalidModel(format!(
                "unexpected feature order {:?}",
                model.feature_order
            )));
        }
        if model.feature_importance.len() != FEATURE_COUNT {
            return Err(Error::InvalidModel(
                "feature_importance must have six entries".into(),
            ));
        }
        if model.trees.is_empty() {
            return Err(Error::InvalidModel("model has no trees".into()));
        }
        Ok(model)
    }

    pub fn write_to<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(self.to_json()?.as_bytes())?;
        writer.write_all(b"\n")?;
        Ok(())
    }
}

struct TrainingData {
    rows: Vec<[f64; FEATURE_COUNT]>,
    labels: Vec<u8>,
}

fn prepare(features: &[FeatureVector], labels: &[QualityFlag]) -> Result<TrainingData> {
    if features.len() != labels.len() {
        return Err(Error::LengthMismatch {
            features: features.len(),
            labels: labels.len(),
        });
    }
    if features.len() < 2 {
        return Err(Error::TooFewSamples(features.len()));
    }
    let mut encoded = Vec::with_capacity(labels.len());
    for label in labels {
        match label {
            QualityFlag::WithControl => encoded.push(0u8),
            QualityFlag::WithoutControl => encoded.push(1u8),
            QualityFlag::Unknown => return Err(Error::UnknownFlag),
        }
    }
    let with_control = encoded.iter().filter(|&&l| l == 0).count();
    if with_control == 0 || with_control == encoded.len() {
        return Err(Error::DegenerateTrainingSet);
    }
    Ok(TrainingData {
        rows: features.iter().map(FeatureVector::as_array).collect(),
        labels: encoded,
    })
}

/// Bootstrap sample of `n` indices, drawn with replacement.
fn bootstrap_indices(rng: &mut SplitMix64, n: usize) -> Vec<u32> {
    (0..n).map(|_| rng.below(n as u64) as u32).collect()
}

/// `k` distinct feature indices in ascending order.
fn sample_features(rng: &mut SplitMix64, k: usize) -> Vec<usize> {
    let mut pool = [0usize, 1, 2, 3, 4, 5];
    for i in 0..k {
        let j = i + rng.below((FEATURE_COUNT - i) as u64) as usize;
        pool.swap(i, j);
    }
    let mut sampled = pool[..k].to_vec();
    sampled.sort_unstable();
    sampled
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    weighted_impurity: f64,
    left: Vec<u32>,
    right: Vec<u32>,
}

struct TreeGrower<'a> {
    data: &'a TrainingData,
    params: ForestHyperparams,
    importance: [f64; FEATURE_COUNT],
    total_samples: f64,
}

impl TreeGrower<'_> {
    fn class_counts(&self, indices: &[u32]) -> [usize; 2] {
        let mut counts = [0usize; 2];
        for &i in indices {
            counts[self.data.labels[i as usize] as usize] += 1;
        }
        counts
    }

    fn grow(&mut self, rng: &mut SplitMix64, indices: Vec<u32>, depth: usize) -> TreeNode {
        let counts = self.class_counts(&indices);
        let node_impurity = gini(counts);
        let splittable = counts[0] > 0
            && counts[1] > 0
            && indices.len() >= 2 * self.params.min_samples_leaf
            && self.params.max_depth.is_none_or(|limit| depth < limit);
        if !splittable {
            return TreeNode::Leaf { counts };
        }
        let candidates = sample_features(rng, self.params.features_per_split);
        match self.best_split(&indices, &candidates, counts) {
            None => TreeNode::Leaf { counts },
            Some(split) => {
                let node_weight = indices.len() as f64;
                let decrease = node_weight * (node_impurity - split.weighted_impurity);
                self.importance[split.feature] += decrease / self.total_samples;
                let left = self.grow(rng, split.left, depth + 1);
                let right = self.grow(rng, split.right, depth + 1);
                TreeNode::Split {
                    feature: split.feature,
                    threshold: split.threshold,
                    left: Box::new(left),
                    right: Box::new(right),
                }
            }
        }
    }

    /// Finds the (feature, threshold) pair minimizing the weighted child
    /// Gini impurity among the candidate features. Candidates are scanned
    /// in ascending feature order and thresholds in ascending value order
    /// with strict improvement only, which implements the deterministic
    /// tie-break of lower feature index, then lower threshold.
    fn best_split(
        &self,
        indices: &[u32],
        candidates: &[usize],
        node_counts: [usize; 2],
    ) -> Option<BestSplit> {
        let n = indices.len();
        let min_leaf = self.params.min_samples_leaf;
        let mut best: Option<(usize, f64, f64)> = None; // (feature, threshold, weighted)
        let mut pairs: Vec<(f64, u8)> = Vec::with_capacity(n);
        for &feature in candidates {
            pairs.clear();
            pairs.extend(indices.iter().map(|&i| {
                (
                    self.data.rows[i as usize][feature],
                    self.data.labels[i as usize],
                )
            }));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

            let mut left_counts = [0usize; 2];
            for (pos, &(value, label)) in pairs.iter().enumerate().take(n - 1) {
                left_counts[label as usize] += 1;
                let next_value = pairs[pos + 1].0;
                if value == next_value {
                    continue;
                }
                let left_n = pos + 1;
                let right_n = n - left_n;
                if left_n < min_leaf || right_n < min_leaf {
                    continue;
                }
                let right_counts = [
                    node_counts[0] - left_counts[0],
                    node_counts[1] - left_counts[1],
                ];
                let weighted = (left_n as f64 * gini(left_counts)
                    + right_n as f64 * gini(right_counts))
                    / n as f64;
                if best.is_none() || weighted < best.unwrap().2 {
                    // For near-adjacent floats the midpoint can round up to
                    // the right value; clamp so `x <= threshold` keeps the
                    // right child non-empty.
                    let mut threshold = value + (next_value - value) / 2.0;
                    if threshold >= next_value {
                        threshold = value;
                    }
                    best = Some((feature, threshold, weighted));
                }
            }
        }
        best.map(|(feature, threshold, weighted)| {
            let mut left = Vec::new();
            let mut right = Vec::new();
            for &i in indices {
                if self.data.rows[i as usize][feature] <= threshold {
                    left.push(i);
                } else {
                    right.push(i);
                }
            }
            BestSplit {
                feature,
                threshold,
                weighted_impurity: weighted,
                left,
                right,
            }
        })
    }
}

fn build_tree(
    data: &TrainingData,
    params: ForestHyperparams,
    tree_index: usize,
) -> (TreeNode, [f64; FEATURE_COUNT]) {
    // Per-tree stream: seed xor tree index, bootstrap drawn first.
    let mut rng = SplitMix64::new(params.seed ^ tree_index as u64);
    let indices = bootstrap_indices(&mut rng, data.rows.len());
    let mut grower = TreeGrower {
        data,
        params,
        importance: [0.0; FEATURE_COUNT],
        total_samples: data.rows.len() as f64,
    };
    let root = grower.grow(&mut rng, indices, 0);
    (root, grower.importance)
}

fn assemble(
    results: Vec<(TreeNode, [f64; FEATURE_COUNT])>,
    params: ForestHyperparams,
) -> ForestModel {
    let mut totals = [0.0f64; FEATURE_COUNT];
    let mut trees = Vec::with_capacity(results.len());
    // Summed in tree order so parallel construction cannot perturb the
    // floating-point result.
    for (tree, importance) in results {
        for (total, value) in totals.iter_mut().zip(importance) {
            *total += value;
        }
        trees.push(tree);
    }
    let sum: f64 = totals.iter().sum();
    let feature_importance = if sum > 0.0 {
        totals.iter().map(|v| v / sum).collect()
    } else {
        vec![1.0 / FEATURE_COUNT as f64; FEATURE_COUNT]
    };
    ForestModel {
        version: MODEL_VERSION,
        hyperparams: params,
        class_labels: [QualityFlag::WithControl, QualityFlag::WithoutControl],
        feature_order: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        trees,
        feature_importance,
    }
}

/// Trains a forest. With the `parallel` feature trees are built across
/// threads; the resulting model is bit-identical to sequential training.
#[cfg(feature = "parallel")]
pub fn train_forest(
    features: &[FeatureVector],
    labels: &[QualityFlag],
    params: &ForestHyperparams,
) -> Result<ForestModel> {
    params.validate()?;
    let data = prepare(features, labels)?;
    let results: Vec<_> = (0..params.tree_count)
        .into_par_iter()
        .map(|tree_index| build_tree(&data, *params, tree_index))
        .collect();
    Ok(assemble(results, *params))
}

#[cfg(not(feature = "parallel"))]
pub fn train_forest(
    features: &[FeatureVector],
    labels: &[QualityFlag],
    params: &ForestHyperparams,
) -> Result<ForestModel> {
    train_forest_sequential(features, labels, params)
}

/// Sequential training; always available, and the reference the parallel
/// path is checked against.
pub fn train_forest_sequential(
    features: &[FeatureVector],
    labels: &[QualityFlag],
    params: &ForestHyperparams,
) -> Result<ForestModel> {
    params.validate()?;
    let data = prepare(features, labels)?;
    let results: Vec<_> = (0..params.tree_count)
        .map(|tree_index| build_tree(&data, *params, tree_index))
        .collect();
    Ok(assemble(results, *params))
}
