//! Stratified k-fold cross-validation, support-weighted
//! precision/recall/F-score reporting, and paired significance testing
//! between classifiers evaluated on the same folds.

pub mod ttest;

use rayon::prelude::*;
use thiserror::Error;

use crate::labeling::{Label, LabeledDataset};
use crate::learners::{self, LearnerSpec, TrainError};
use crate::seeds;

pub use ttest::{paired_t_test, paired_t_test_with, TTestError, TTestVariant, TestResult};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("k must be at least 2 (got {k})")]
    InvalidK { k: usize },
    #[error("the {label} class has {count} members, fewer than k = {k}")]
    ClassSmallerThanK { label: Label, count: usize, k: usize },
    #[error("fold assignment covers {folds} examples but the dataset has {dataset}")]
    FoldMismatch { folds: usize, dataset: usize },
    #[error("cannot compute metrics from an empty confusion matrix")]
    EmptyConfusion,
    #[error("training failed on fold {fold}: {source}")]
    Training { fold: usize, source: TrainError },
}

/// Maps every example index to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    k: usize,
    fold_of: Vec<usize>,
}

impl FoldAssignment {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of examples covered.
    pub fn len(&self) -> usize {
        self.fold_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fold_of.is_empty()
    }

    pub fn fold_of(&self, example: usize) -> usize {
        self.fold_of[example]
    }

    /// Example indices held out by `fold`, ascending.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        assert!(fold < self.k, "fold {fold} out of range for k = {}", self.k);
        (0..self.fold_of.len())
            .filter(|i| self.fold_of[*i] == fold)
            .collect()
    }

    /// Example indices trained on for `fold`, ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        assert!(fold < self.k, "fold {fold} out of range for k = {}", self.k);
        (0..self.fold_of.len())
            .filter(|i| self.fold_of[*i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Splits the dataset into `k` class-stratified folds.
///
/// Examples are shuffled with the seed, then dealt round-robin one
/// class at a time, so per-fold class counts differ from perfect
/// stratification by at most one.
pub fn stratified_folds(
    dataset: &LabeledDataset,
    k: usize,
    seed: u64,
) -> Result<FoldAssignment, EvalError> {
    if k < 2 {
        return Err(EvalError::InvalidK { k });
    }
    let (good, bad) = dataset.class_counts();
    for (label, count) in [(Label::Good, good), (Label::Bad, bad)] {
        if count < k {
            return Err(EvalError::ClassSmallerThanK { label, count, k });
        }
    }

    let mut order: Vec<usize> = (0..dataset.len()).collect();
    use rand::seq::SliceRandom;
    order.shuffle(&mut seeds::stream(seed, "folds", 0));

    let mut fold_of = vec![0usize; dataset.len()];
    let mut counter = 0usize;
    for class in [Label::Good, Label::Bad] {
        for &i in &order {
            if dataset.examples()[i].label == class {
                fold_of[i] = counter % k;
                counter += 1;
            }
        }
    }
    Ok(FoldAssignment { k, fold_of })
}

/// Prediction counts with `Good` as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new() -> ConfusionMatrix {
        ConfusionMatrix::default()
    }

    pub fn record(&mut self, actual: Label, predicted: Label) {
        match (actual, predicted) {
            (Label::Good, Label::Good) => self.tp += 1,
            (Label::Bad, Label::Good) => self.fp += 1,
            (Label::Good, Label::Bad) => self.fn_ += 1,
            (Label::Bad, Label::Bad) => self.tn += 1,
        }
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.tn += other.tn;
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn accuracy(&self) -> f64 {
        if self.total() == 0 {
            return 0.0;
        }
        (self.tp + self.tn) as f64 / self.total() as f64
    }
}

/// Ratio with the convention that an empty denominator scores 0.
fn safe_ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Support-weighted precision, recall, and F-score over both classes.
///
/// Per-class metrics are computed for `Good` and `Bad` separately, then
/// averaged with weights equal to each class's true support. A class
/// that was never predicted contributes precision 0.
pub fn weighted_prf(confusion: &ConfusionMatrix) -> Result<(f64, f64, f64), EvalError> {
    let total = confusion.total();
    if total == 0 {
        return Err(EvalError::EmptyConfusion);
    }
    let p_good = safe_ratio(confusion.tp, confusion.tp + confusion.fp);
    let r_good = safe_ratio(confusion.tp, confusion.tp + confusion.fn_);
    let f_good = f_score(p_good, r_good);
    let p_bad = safe_ratio(confusion.tn, confusion.tn + confusion.fn_);
    let r_bad = safe_ratio(confusion.tn, confusion.tn + confusion.fp);
    let f_bad = f_score(p_bad, r_bad);
    let w_good = (confusion.tp + confusion.fn_) as f64 / total as f64;
    let w_bad = (confusion.fp + confusion.tn) as f64 / total as f64;
    Ok((
        w_good * p_good + w_bad * p_bad,
        w_good * r_good + w_bad * r_bad,
        w_good * f_good + w_bad * f_bad,
    ))
}

/// Everything one cross-validation run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub spec: LearnerSpec,
    pub k: usize,
    pub seed: u64,
    pub fold_confusions: Vec<ConfusionMatrix>,
    pub fold_f_scores: Vec<f64>,
    /// Sum of the per-fold confusion matrices.
    pub pooled: ConfusionMatrix,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub accuracy: f64,
}

/// Stratifies with `seed`, then cross-validates on those folds.
pub fn cross_validate(
    spec: &LearnerSpec,
    dataset: &LabeledDataset,
    k: usize,
    seed: u64,
) -> Result<EvalReport, EvalError> {
    let folds = stratified_folds(dataset, k, seed)?;
    cross_validate_with_folds(spec, dataset, &folds, seed)
}

/// Cross-validates on a caller-supplied fold assignment, so several
/// specs can be compared on identical folds.
///
/// Each fold trains on the other k−1 folds with a seed derived from
/// (spec seed, cv seed, fold index) and is scored on the held-out fold.
/// Folds run concurrently; the outcome depends only on the arguments.
pub fn cross_validate_with_folds(
    spec: &LearnerSpec,
    dataset: &LabeledDataset,
    folds: &FoldAssignment,
    cv_seed: u64,
) -> Result<EvalReport, EvalError> {
    if folds.len() != dataset.len() {
        return Err(EvalError::FoldMismatch {
            folds: folds.len(),
            dataset: dataset.len(),
        });
    }
    let k = folds.k();
    let outcomes: Vec<Result<ConfusionMatrix, EvalError>> = (0..k)
        .into_par_iter()
        .map(|fold| {
            let train_set = dataset.select(&folds.train_indices(fold));
            let mut fold_spec = spec.clone();
            fold_spec.seed = seeds::mix(&[spec.seed, cv_seed, fold as u64], "fold-train");
            let model = learners::train(&fold_spec, &train_set)
                .map_err(|source| EvalError::Training { fold, source })?;
            let mut confusion = ConfusionMatrix::new();
            for i in folds.test_indices(fold) {
                let example = &dataset.examples()[i];
                let prediction = model.predict(&example.vector);
                confusion.record(example.label, prediction.label);
            }
            Ok(confusion)
        })
        .collect();

    // Surface the lowest-fold error first so failures are
    // schedule-independent too.
    let mut fold_confusions = Vec::with_capacity(k);
    for outcome in outcomes {
        fold_confusions.push(outcome?);
    }

    let mut pooled = ConfusionMatrix::new();
    for confusion in &fold_confusions {
        pooled.add(confusion);
    }
    let fold_f_scores = fold_confusions
        .iter()
        .map(|c| weighted_prf(c).map(|(_, _, f)| f))
        .collect::<Result<Vec<f64>, EvalError>>()?;
    let (precision, recall, f_score) = weighted_prf(&pooled)?;
    Ok(EvalReport {
        spec: spec.clone(),
        k,
        seed: cv_seed,
        fold_confusions,
        fold_f_scores,
        accuracy: pooled.accuracy(),
        pooled,
        precision,
        recall,
        f_score,
    })
}

/// Canonical machine-readable report text. Equal reports render to
/// identical bytes.
pub fn render_machine_report(report: &EvalReport) -> String {
    let mut out = String::new();
    out.push_str("equicast-report v1\n");
    out.push_str(&format!("algorithm {}\n", report.spec.algorithm));
    out.push_str(&format!("seed {}\n", report.spec.seed));
    out.push_str(&format!("cv_seed {}\n", report.seed));
    out.push_str(&format!("k {}\n", report.k));
    out.push_str(&format!("examples {}\n", report.pooled.total()));
    out.push_str(&format!(
        "pooled {} {} {} {}\n",
        report.pooled.tp, report.pooled.fp, report.pooled.fn_, report.pooled.tn
    ));
    out.push_str(&format!("precision {}\n", report.precision));
    out.push_str(&format!("recall {}\n", report.recall));
    out.push_str(&format!("f_score {}\n", report.f_score));
    out.push_str(&format!("accuracy {}\n", report.accuracy));
    for (i, confusion) in report.fold_confusions.iter().enumerate() {
        out.push_str(&format!(
            "fold {} {} {} {} {} {}\n",
            i, confusion.tp, confusion.fp, confusion.fn_, confusion.tn, report.fold_f_scores[i]
        ));
    }
    out
}

/// Aligned human-readable comparison table, one row per report.
pub fn render_human_table(reports: &[&EvalReport]) -> String {
    let headers = ["Algorithm", "Precision", "Recall", "F-score", "Accuracy"];
    let rows: Vec<[String; 5]> = reports
        .iter()
        .map(|r| {
            [
                r.spec.algorithm.to_string(),
                format!("{:.3}", r.precision),
                format!("{:.3}", r.recall),
                format!("{:.3}", r.f_score),
                format!("{:.3}", r.accuracy),
            ]
        })
        .collect();
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row.iter()) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    for (i, header) in headers.iter().enumerate() {
        if i > 0 {
            out.push_str("  ");
        }
        if i == 0 {
            out.push_str(&format!("{header:<width$}", width = widths[i]));
        } else {
            out.push_str(&format!("{header:>width$}", width = widths[i]));
        }
    }
    out.push('\n');
    for row in &rows {
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            if i == 0 {
                out.push_str(&format!("{cell:<width$}", width = widths[i]));
            } else {
                out.push_str(&format!("{cell:>width$}", width = widths[i]));
            }
        }
        out.push('\n');
    }
    out
}
