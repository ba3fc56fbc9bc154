//! Gaussian naive Bayes with missing-value skipping.
//!
//! Likelihoods are class-conditional normal densities estimated from the
//! present (non-sentinel) training values only. Variances are population
//! (divide-by-n) estimates, so duplicating the whole dataset leaves the
//! model unchanged, and are floored for numerical safety. A feature that
//! has no present value in either class is recorded as unused.

use crate::features::{FeatureSet, FeatureVector};
use crate::labeling::{Label, LabeledDataset};
use crate::learners::TrainError;

/// Smallest admissible class-conditional variance.
pub const VARIANCE_FLOOR: f64 = 1e-9;

/// Per-feature class-conditional Gaussians.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPair {
    pub good_mean: f64,
    pub good_var: f64,
    pub bad_mean: f64,
    pub bad_var: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayesModel {
    features: FeatureSet,
    prior_good: f64,
    /// One entry per feature; `None` when a class had no present values.
    stats: Vec<Option<GaussianPair>>,
}

fn mean_and_population_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.max(VARIANCE_FLOOR))
}

fn log_normal_density(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * (d * d / var + (2.0 * std::f64::consts::PI * var).ln())
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Estimates priors and per-feature Gaussians. Errors when a class is
/// absent.
pub fn train_naive_bayes(dataset: &LabeledDataset) -> Result<NaiveBayesModel, TrainError> {
    if dataset.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let (n_good, n_bad) = dataset.class_counts();
    if n_bad == 0 {
        return Err(TrainError::SingleClass(Label::Good));
    }
    if n_good == 0 {
        return Err(TrainError::SingleClass(Label::Bad));
    }
    let prior_good = n_good as f64 / dataset.len() as f64;

    let n_features = dataset.features().len();
    let mut stats = Vec::with_capacity(n_features);
    let mut good_values = Vec::with_capacity(n_good);
    let mut bad_values = Vec::with_capacity(n_bad);
    for f in 0..n_features {
        good_values.clear();
        bad_values.clear();
        for ex in dataset.examples() {
            if let Some(v) = ex.vector.get(f) {
                match ex.label {
                    Label::Good => good_values.push(v),
                    Label::Bad => bad_values.push(v),
                }
            }
        }
        if good_values.is_empty() || bad_values.is_empty() {
            stats.push(None);
            continue;
        }
        let (good_mean, good_var) = mean_and_population_variance(&good_values);
        let (bad_mean, bad_var) = mean_and_population_variance(&bad_values);
        stats.push(Some(GaussianPair {
            good_mean,
            good_var,
            bad_mean,
            bad_var,
        }));
    }
    Ok(NaiveBayesModel {
        features: dataset.features().clone(),
        prior_good,
        stats,
    })
}

impl NaiveBayesModel {
    pub fn features(&self) -> &FeatureSet {
        &self.features
    }

    pub fn prior_good(&self) -> f64 {
        self.prior_good
    }

    pub fn stats(&self) -> &[Option<GaussianPair>] {
        &self.stats
    }

    /// Posterior probability of `Good`. Missing and unused features are
    /// skipped; with no usable evidence the score is the prior.
    ///
    /// Panics if the vector is not aligned to the model's feature set.
    pub fn score(&self, vector: &FeatureVector) -> f64 {
        assert_eq!(
            vector.len(),
            self.features.len(),
            "vector not aligned to the model's feature set"
        );
        let mut log_good = self.prior_good.ln();
        let mut log_bad = (1.0 - self.prior_good).ln();
        for (f, pair) in self.stats.iter().enumerate() {
            let (Some(pair), Some(x)) = (pair, vector.get(f)) else {
                continue;
            };
            log_good += log_normal_density(x, pair.good_mean, pair.good_var);
            log_bad += log_normal_density(x, pair.bad_mean, pair.bad_var);
        }
        sigmoid(log_good - log_bad)
    }

    pub(crate) fn from_parts(
        features: FeatureSet,
        prior_good: f64,
        stats: Vec<Option<GaussianPair>>,
    ) -> Result<NaiveBayesModel, String> {
        if !(prior_good > 0.0 && prior_good < 1.0) {
            return Err(format!("prior must be inside (0,1), got {prior_good}"));
        }
        if stats.len() != features.len() {
            return Err("per-feature statistics misaligned".to_string());
        }
        for (i, pair) in stats.iter().enumerate() {
            if let Some(p) = pair {
                for v in [p.good_var, p.bad_var] {
                    // Also catches NaN, which every comparison rejects.
                    if v.is_nan() || v < VARIANCE_FLOOR {
                        return Err(format!("feature {i} variance {v} below floor"));
                    }
                }
                for m in [p.good_mean, p.bad_mean] {
                    if !m.is_finite() {
                        return Err(format!("feature {i} has non-finite mean"));
                    }
                }
            }
        }
        Ok(NaiveBayesModel {
            features,
            prior_good,
            stats,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureId, FeatureSet, SENTINEL};
    use crate::labeling::LabeledExample;
    use crate::snapshot::Quarter;
    use approx::assert_abs_diff_eq;
    use Label::{Bad, Good};

    fn dataset(rows: &[(Vec<f64>, Label)], n_features: usize) -> LabeledDataset {
        let ids: Vec<FeatureId> = (0..n_features).map(FeatureId::Indicator).collect();
        let features = FeatureSet::new(ids).unwrap();
        let examples = rows
            .iter()
            .enumerate()
            .map(|(i, (values, label))| LabeledExample {
                vector: FeatureVector::from_encoded(values.clone()),
                label: *label,
                ticker: format!("T{i}"),
                quarter: Quarter::new(2014, 4).unwrap(),
            })
            .collect();
        LabeledDataset::new(features, examples).unwrap()
    }

    fn vector(values: &[f64]) -> FeatureVector {
        FeatureVector::from_encoded(values.to_vec())
    }

    #[test]
    fn mirrored_classes_score_half_at_the_origin() {
        let data = dataset(
            &[
                (vec![1.0], Good),
                (vec![2.0], Good),
                (vec![3.0], Good),
                (vec![-1.0], Bad),
                (vec![-2.0], Bad),
                (vec![-3.0], Bad),
            ],
            1,
        );
        let model = train_naive_bayes(&data).unwrap();
        assert_abs_diff_eq!(model.score(&vector(&[0.0])), 0.5, epsilon = 1e-12);
        assert!(model.score(&vector(&[2.0])) > 0.9);
        assert!(model.score(&vector(&[-2.0])) < 0.1);
    }

    /// Oracle: direct Bayes-rule arithmetic on a 6-row dataset, written
    /// out with plain density evaluations and explicit normalization.
    #[test]
    fn six_row_posterior_matches_direct_arithmetic() {
        let rows = [
            (vec![1.0, 10.0], Good),
            (vec![2.0, 11.0], Good),
            (vec![3.0, 9.0], Good),
            (vec![6.0, 14.0], Bad),
            (vec![7.0, 13.0], Bad),
            (vec![5.0, 15.0], Bad),
        ];
        let data = dataset(&rows, 2);
        let model = train_naive_bayes(&data).unwrap();
        let x = [3.0, 11.0];

        // Oracle, parameter by parameter: means and population variances.
        let density = |x: f64, mean: f64, var: f64| {
            (-((x - mean) * (x - mean)) / (2.0 * var)).exp()
                / (2.0 * std::f64::consts::PI * var).sqrt()
        };
        // Good: f0 values 1,2,3 -> mean 2, var 2/3; f1 values 10,11,9 -> mean 10, var 2/3.
        // Bad:  f0 values 6,7,5 -> mean 6, var 2/3; f1 values 14,13,15 -> mean 14, var 2/3.
        let like_good = density(x[0], 2.0, 2.0 / 3.0) * density(x[1], 10.0, 2.0 / 3.0) * 0.5;
        let like_bad = density(x[0], 6.0, 2.0 / 3.0) * density(x[1], 14.0, 2.0 / 3.0) * 0.5;
        let oracle = like_good / (like_good + like_bad);

        assert_abs_diff_eq!(model.score(&vector(&x)), oracle, epsilon = 1e-12);
        // Closed form: all four Gaussians share variance 2/3 and the
        // priors are equal, so everything cancels except the squared
        // distances (1,1) vs (3,3): posterior = 1 / (1 + e^{-12}).
        assert_abs_diff_eq!(oracle, 1.0 / (1.0 + (-12.0f64).exp()), epsilon = 1e-12);
        // The equidistant probe (4, 12) sits exactly between the classes.
        assert_abs_diff_eq!(model.score(&vector(&[4.0, 12.0])), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn constant_feature_leaves_posterior_to_the_priors() {
        let data = dataset(
            &[
                (vec![5.0], Good),
                (vec![5.0], Good),
                (vec![5.0], Bad),
                (vec![5.0], Bad),
                (vec![5.0], Bad),
            ],
            1,
        );
        let model = train_naive_bayes(&data).unwrap();
        // Identical floored Gaussians cancel; only priors remain.
        assert_abs_diff_eq!(model.score(&vector(&[5.0])), 0.4, epsilon = 1e-9);
    }

    #[test]
    fn all_missing_input_scores_the_prior() {
        let data = dataset(
            &[
                (vec![1.0], Good),
                (vec![2.0], Good),
                (vec![-1.0], Bad),
                (vec![-2.0], Bad),
            ],
            1,
        );
        let model = train_naive_bayes(&data).unwrap();
        assert_abs_diff_eq!(model.score(&vector(&[SENTINEL])), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn sentinel_training_values_never_enter_statistics() {
        let with_missing = dataset(
            &[
                (vec![1.0, SENTINEL], Good),
                (vec![2.0, 7.0], Good),
                (vec![-1.0, SENTINEL], Bad),
                (vec![-2.0, 3.0], Bad),
            ],
            2,
        );
        let clean = dataset(
            &[
                (vec![1.0, 7.0], Good),
                (vec![2.0, 7.0], Good),
                (vec![-1.0, 3.0], Bad),
                (vec![-2.0, 3.0], Bad),
            ],
            2,
        );
        let m = train_naive_bayes(&with_missing).unwrap();
        let c = train_naive_bayes(&clean).unwrap();
        // Feature 1 in the missing-value dataset sees single values 7/3,
        // exactly like the clean dataset's (constant) columns.
        let m1 = m.stats()[1].as_ref().unwrap();
        let c1 = c.stats()[1].as_ref().unwrap();
        assert_eq!(m1, c1);
    }

    #[test]
    fn feature_absent_in_one_class_is_unused() {
        let data = dataset(
            &[
                (vec![1.0, 4.0], Good),
                (vec![2.0, 5.0], Good),
                (vec![-1.0, SENTINEL], Bad),
                (vec![-2.0, SENTINEL], Bad),
            ],
            2,
        );
        let model = train_naive_bayes(&data).unwrap();
        assert!(model.stats()[0].is_some());
        assert!(model.stats()[1].is_none());
        // The unused feature contributes nothing even when present.
        let a = model.score(&vector(&[1.5, 100.0]));
        let b = model.score(&vector(&[1.5, SENTINEL]));
        assert_eq!(a, b);
    }

    #[test]
    fn duplicating_the_dataset_preserves_the_posterior() {
        let rows = [
            (vec![1.0, 3.0], Good),
            (vec![2.0, 4.0], Good),
            (vec![5.0, 0.5], Bad),
            (vec![6.0, 1.5], Bad),
            (vec![4.0, 2.5], Bad),
        ];
        let mut doubled: Vec<(Vec<f64>, Label)> = rows.to_vec();
        doubled.extend(rows.iter().cloned());
        let single = train_naive_bayes(&dataset(&rows, 2)).unwrap();
        let double = train_naive_bayes(&dataset(&doubled, 2)).unwrap();
        for probe in [[1.5, 2.0], [5.5, 1.0], [3.0, 3.0]] {
            assert_abs_diff_eq!(
                single.score(&vector(&probe)),
                double.score(&vector(&probe)),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn single_class_is_a_training_error() {
        let data = dataset(&[(vec![1.0], Good), (vec![2.0], Good)], 1);
        assert!(matches!(
            train_naive_bayes(&data),
            Err(TrainError::SingleClass(Good))
        ));
    }
}
