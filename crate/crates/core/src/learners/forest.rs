//! Bagged ensemble of random-subspace trees.
//!
//! Each tree trains on a bootstrap resample using a random stream derived
//! only from (forest seed, tree index), so any training schedule — any
//! thread count, any completion order — produces the identical forest.

use rand::Rng;
use rayon::prelude::*;

use crate::features::{FeatureSet, FeatureVector};
use crate::labeling::LabeledDataset;
use crate::learners::tree::{grow_random_tree, Columns, RandomTreeParams, TreeModel};
use crate::learners::TrainError;
use crate::seeds;

/// Forest hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestParams {
    pub trees: usize,
    /// Minimum examples per leaf. The forest's score is a mean of leaf
    /// Good-proportions, so the default keeps leaves large enough for
    /// those proportions to be meaningful probability estimates rather
    /// than memorized 0/1 votes.
    pub min_leaf: usize,
    /// Features drawn per node; `None` means floor(log2 F) + 1.
    pub features_per_split: Option<usize>,
    /// Train each tree on a bootstrap resample (on by default).
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            trees: 60,
            min_leaf: 25,
            features_per_split: None,
            bootstrap: true,
        }
    }
}

/// A trained forest. All trees share one feature set.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    trees: Vec<TreeModel>,
    features: FeatureSet,
    seed: u64,
    params: ForestParams,
}

impl ForestModel {
    pub fn trees(&self) -> &[TreeModel] {
        &self.trees
    }

    pub fn features(&self) -> &FeatureSet {
        &self.features
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn params(&self) -> &ForestParams {
        &self.params
    }

    /// Probability assigned to `Good`: the mean of the per-tree leaf
    /// proportions. The ensemble label is derived from this mean score.
    pub fn score(&self, vector: &FeatureVector) -> f64 {
        let total: f64 = self.trees.iter().map(|t| t.score(vector)).sum();
        total / self.trees.len() as f64
    }

    pub(crate) fn from_parts(
        trees: Vec<TreeModel>,
        features: FeatureSet,
        seed: u64,
        params: ForestParams,
    ) -> Result<ForestModel, String> {
        if trees.is_empty() {
            return Err("forest has no trees".to_string());
        }
        for (i, tree) in trees.iter().enumerate() {
            if tree.features() != &features {
                return Err(format!("tree {i} disagrees on the feature set"));
            }
        }
        Ok(ForestModel {
            trees,
            features,
            seed,
            params,
        })
    }
}

/// Trains a bagged forest of random-subspace trees. Deterministic given
/// (dataset, params, seed) regardless of the rayon thread count.
pub fn train_random_forest(
    dataset: &LabeledDataset,
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel, TrainError> {
    if params.trees < 1 {
        return Err(TrainError::InvalidParams(
            "tree count must be at least 1".to_string(),
        ));
    }
    if dataset.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let columns = Columns::from_dataset(dataset);
    let n = dataset.len();
    let tree_params = RandomTreeParams {
        min_leaf: params.min_leaf,
        features_per_split: params.features_per_split,
    };
    let trees: Result<Vec<TreeModel>, TrainError> = (0..params.trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeds::stream(seed, "tree", i as u64);
            let rows: Vec<u32> = if params.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n) as u32).collect()
            } else {
                (0..n as u32).collect()
            };
            grow_random_tree(&columns, rows, dataset.features(), &tree_params, &mut rng)
        })
        .collect();
    Ok(ForestModel {
        trees: trees?,
        features: dataset.features().clone(),
        seed,
        params: params.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureId;
    use crate::labeling::{Label, LabeledExample};
    use crate::learners::tree::train_random_tree;
    use crate::snapshot::Quarter;

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

    fn noisy_dataset() -> LabeledDataset {
        let mut rows = Vec::new();
        for i in 0..50u64 {
            let mut values = Vec::new();
            for f in 0..4u64 {
                values.push(((i * 31 + f * 57) % 23) as f64);
            }
            let label = if values[0] + values[2] < 22.0 {
                Label::Good
            } else {
                Label::Bad
            };
            rows.push((values, label));
        }
        dataset(&rows, 4)
    }

    #[test]
    fn single_tree_without_bootstrap_matches_the_tree_learner() {
        let data = noisy_dataset();
        let params = ForestParams {
            trees: 1,
            min_leaf: 2,
            bootstrap: false,
            features_per_split: Some(4),
        };
        let forest = train_random_forest(&data, &params, 99).unwrap();
        let lone = train_random_tree(
            &data,
            &RandomTreeParams {
                min_leaf: 2,
                features_per_split: Some(4),
            },
            // The forest derives the tree-0 stream from (seed, "tree", 0);
            // reproduce it through the same derivation.
            0,
        );
        // Seed paths differ ("tree" vs "random-tree" streams), so compare
        // behavior instead of structure: with k = all features and no
        // bootstrap the search is deterministic and identical.
        let lone = lone.unwrap();
        for ex in data.examples() {
            assert_eq!(
                forest.score(&ex.vector),
                lone.score(&ex.vector),
                "ensemble of one must predict exactly like the single tree"
            );
        }
    }

    #[test]
    fn same_seed_gives_identical_forest() {
        let data = noisy_dataset();
        let params = ForestParams {
            trees: 12,
            ..ForestParams::default()
        };
        let a = train_random_forest(&data, &params, 5).unwrap();
        let b = train_random_forest(&data, &params, 5).unwrap();
        assert_eq!(a, b);
        let c = train_random_forest(&data, &params, 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn forest_score_is_mean_of_tree_scores() {
        let data = noisy_dataset();
        let params = ForestParams {
            trees: 7,
            ..ForestParams::default()
        };
        let forest = train_random_forest(&data, &params, 3).unwrap();
        let v = &data.examples()[0].vector;
        let mean: f64 =
            forest.trees().iter().map(|t| t.score(v)).sum::<f64>() / forest.trees().len() as f64;
        assert_eq!(forest.score(v), mean);
        assert!((0.0..=1.0).contains(&forest.score(v)));
    }

    #[test]
    fn forest_fits_training_data_at_least_as_well_as_one_tree() {
        let data = noisy_dataset();
        let accuracy = |scores: Vec<f64>| {
            scores
                .iter()
                .zip(data.examples())
                .filter(|(s, ex)| (**s >= 0.5) == (ex.label == Label::Good))
                .count() as f64
                / data.len() as f64
        };
        let mut forest_wins = 0;
        for seed in 0..5 {
            // Memorization-depth leaves on both sides so the comparison
            // isolates the effect of bagging.
            let forest = train_random_forest(
                &data,
                &ForestParams {
                    trees: 25,
                    min_leaf: 2,
                    ..ForestParams::default()
                },
                seed,
            )
            .unwrap();
            let tree = train_random_tree(&data, &RandomTreeParams::default(), seed).unwrap();
            let fa = accuracy(data.examples().iter().map(|e| forest.score(&e.vector)).collect());
            let ta = accuracy(data.examples().iter().map(|e| tree.score(&e.vector)).collect());
            if fa >= ta {
                forest_wins += 1;
            }
        }
        assert!(
            forest_wins >= 3,
            "forest training accuracy beat a single tree only {forest_wins}/5 times"
        );
    }

    #[test]
    fn empty_dataset_and_zero_trees_are_errors() {
        let features = FeatureSet::new([FeatureId::Indicator(0)]).unwrap();
        let empty = LabeledDataset::new(features, vec![]).unwrap();
        assert!(matches!(
            train_random_forest(&empty, &ForestParams::default(), 1),
            Err(TrainError::EmptyDataset)
        ));
        let data = noisy_dataset();
        let params = ForestParams {
            trees: 0,
            ..ForestParams::default()
        };
        assert!(matches!(
            train_random_forest(&data, &params, 1),
            Err(TrainError::InvalidParams(_))
        ));
    }
}
