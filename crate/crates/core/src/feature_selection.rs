//! Greedy backward feature elimination driven by cross-validated
//! F-score.
//!
//! Each pass evaluates every remaining feature's removal on one fixed
//! fold assignment and removes the feature whose absence scores
//! highest, provided that score does not fall below the current one.
//! Score-neutral removals are accepted on purpose: they shrink the set
//! toward the smallest one that performs best.

use rayon::prelude::*;
use thiserror::Error;

use crate::evaluation::{cross_validate_with_folds, stratified_folds, EvalError};
use crate::features::{FeatureId, FeatureSet};
use crate::labeling::LabeledDataset;
use crate::learners::LearnerSpec;

#[derive(Debug, Error, PartialEq)]
pub enum SelectionError {
    #[error("feature selection needs at least 2 features (got {0})")]
    TooFewFeatures(usize),
    #[error("evaluating the full feature set failed: {source}")]
    FullSet { source: EvalError },
    #[error("evaluating the set without {candidate} failed: {source}")]
    Candidate { candidate: String, source: EvalError },
}

/// One considered removal: the best candidate of its pass.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionStep {
    pub candidate: FeatureId,
    pub score_before: f64,
    pub score_after: f64,
    pub accepted: bool,
}

/// The outcome of a backward-elimination run.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub selected: FeatureSet,
    /// Cross-validated pooled weighted F-score of `selected` on the
    /// run's fold assignment.
    pub final_score: f64,
    /// One entry per pass; every entry but possibly the last is an
    /// accepted removal, and replaying the accepted removals in order
    /// reproduces `selected`.
    pub trace: Vec<SelectionStep>,
    pub spec: LearnerSpec,
    pub k: usize,
    pub seed: u64,
}

/// Greedy backward elimination over the dataset's feature set.
///
/// A single fold assignment, fixed up front from (dataset, k, seed),
/// scores every evaluation in the run, so candidate comparisons carry
/// no fold noise. Per pass, candidates are scored concurrently and the
/// winner is chosen deterministically: highest score, then lowest
/// feature in canonical order. The final score can therefore never be
/// worse than the full set's score.
pub fn backward_eliminate(
    dataset: &LabeledDataset,
    spec: &LearnerSpec,
    k: usize,
    seed: u64,
) -> Result<SelectionResult, SelectionError> {
    if dataset.features().len() < 2 {
        return Err(SelectionError::TooFewFeatures(dataset.features().len()));
    }
    let folds =
        stratified_folds(dataset, k, seed).map_err(|source| SelectionError::FullSet { source })?;
    let mut current_set = dataset.features().clone();
    let mut current_score = cross_validate_with_folds(spec, dataset, &folds, seed)
        .map_err(|source| SelectionError::FullSet { source })?
        .f_score;

    let mut trace = Vec::new();
    while current_set.len() >= 2 {
        let candidates: Vec<FeatureId> = current_set.members().to_vec();
        let scored: Vec<Result<(FeatureId, f64), SelectionError>> = candidates
            .par_iter()
            .map(|&candidate| {
                let reduced = current_set
                    .without(candidate)
                    .expect("candidate comes from the set and the set has >= 2 members");
                let projected = dataset.project(&reduced);
                let report = cross_validate_with_folds(spec, &projected, &folds, seed).map_err(
                    |source| SelectionError::Candidate {
                        candidate: candidate.name().to_string(),
                        source,
                    },
                )?;
                Ok((candidate, report.f_score))
            })
            .collect();

        // Deterministic pick: first strict maximum in canonical member
        // order, so ties fall to the lowest feature.
        let mut best: Option<(FeatureId, f64)> = None;
        for outcome in scored {
            let (candidate, score) = outcome?;
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((candidate, score));
            }
        }
        let (candidate, score) = best.expect("a set with >= 2 members has candidates");
        let accepted = score >= current_score;
        trace.push(SelectionStep {
            candidate,
            score_before: current_score,
            score_after: score,
            accepted,
        });
        if !accepted {
            break;
        }
        current_set = current_set
            .without(candidate)
            .expect("accepted candidate is a member of a >= 2-member set");
        current_score = score;
    }

    Ok(SelectionResult {
        selected: current_set,
        final_score: current_score,
        trace,
        spec: spec.clone(),
        k,
        seed,
    })
}
