//! Classifier training and prediction.
//!
//! Five algorithms share one interface: a pruned decision tree, a
//! single randomized tree, a bagged random forest, Gaussian naive
//! Bayes, and L2-regularized logistic regression. Every model scores a
//! feature vector with the probability it assigns to `Good`, and the
//! predicted label is `Good` exactly when that score is at least 0.5.

pub mod bayes;
pub mod criterion;
pub mod forest;
pub mod logistic;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::features::{FeatureSet, FeatureVector};
use crate::labeling::{Label, LabeledDataset};
use bayes::NaiveBayesModel;
use forest::{ForestModel, ForestParams};
use logistic::{LogisticModel, LogisticParams};
use tree::{C45Params, RandomTreeParams, TreeModel};

/// Why training could not produce a model.
#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("cannot train on an empty dataset")]
    EmptyDataset,
    #[error("training data contains only the {0} class")]
    SingleClass(Label),
    #[error("invalid training parameter: {0}")]
    InvalidParams(String),
}

/// The available classifier families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    C45Tree,
    RandomTree,
    RandomForest,
    NaiveBayes,
    Logistic,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::C45Tree,
        Algorithm::RandomTree,
        Algorithm::RandomForest,
        Algorithm::NaiveBayes,
        Algorithm::Logistic,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::C45Tree => "c45_tree",
            Algorithm::RandomTree => "random_tree",
            Algorithm::RandomForest => "random_forest",
            Algorithm::NaiveBayes => "naive_bayes",
            Algorithm::Logistic => "logistic",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("unknown algorithm {0:?} (expected one of c45_tree, random_tree, random_forest, naive_bayes, logistic)")]
pub struct ParseAlgorithmError(String);

impl FromStr for Algorithm {
    type Err = ParseAlgorithmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "c45_tree" => Ok(Algorithm::C45Tree),
            "random_tree" => Ok(Algorithm::RandomTree),
            "random_forest" => Ok(Algorithm::RandomForest),
            "naive_bayes" => Ok(Algorithm::NaiveBayes),
            "logistic" => Ok(Algorithm::Logistic),
            other => Err(ParseAlgorithmError(other.to_string())),
        }
    }
}

/// Algorithm-specific hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub enum AlgoParams {
    C45(C45Params),
    RandomTree(RandomTreeParams),
    Forest(ForestParams),
    NaiveBayes,
    Logistic(LogisticParams),
}

impl AlgoParams {
    fn default_for(algorithm: Algorithm) -> AlgoParams {
        match algorithm {
            Algorithm::C45Tree => AlgoParams::C45(C45Params::default()),
            Algorithm::RandomTree => AlgoParams::RandomTree(RandomTreeParams::default()),
            Algorithm::RandomForest => AlgoParams::Forest(ForestParams::default()),
            Algorithm::NaiveBayes => AlgoParams::NaiveBayes,
            Algorithm::Logistic => AlgoParams::Logistic(LogisticParams::default()),
        }
    }
}

/// A complete, reproducible recipe for training one model: the
/// algorithm, its hyperparameters, and the randomness seed.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerSpec {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub params: AlgoParams,
}

fn parse_as<T: FromStr>(name: &str, value: &str) -> Result<T, TrainError> {
    value.parse().map_err(|_| {
        TrainError::InvalidParams(format!("cannot parse {value:?} as a value for {name}"))
    })
}

fn parse_subset_size(value: &str) -> Result<Option<usize>, TrainError> {
    if value == "auto" {
        return Ok(None);
    }
    let k: usize = parse_as("features_per_split", value)?;
    if k == 0 {
        return Err(TrainError::InvalidParams(
            "features_per_split must be at least 1 (or \"auto\")".to_string(),
        ));
    }
    Ok(Some(k))
}

impl LearnerSpec {
    pub fn new(algorithm: Algorithm, seed: u64) -> LearnerSpec {
        LearnerSpec {
            algorithm,
            seed,
            params: AlgoParams::default_for(algorithm),
        }
    }

    /// Sets one named hyperparameter from its text form. Names the
    /// chosen algorithm does not define are rejected.
    pub fn set_param(&mut self, name: &str, value: &str) -> Result<(), TrainError> {
        let unknown = || {
            TrainError::InvalidParams(format!(
                "{name:?} is not a parameter of {}",
                self.algorithm
            ))
        };
        match &mut self.params {
            AlgoParams::C45(p) => match name {
                "min_leaf" => p.min_leaf = parse_as(name, value)?,
                "confidence" => p.confidence = parse_as(name, value)?,
                "prune" => p.prune = parse_as(name, value)?,
                _ => return Err(unknown()),
            },
            AlgoParams::RandomTree(p) => match name {
                "min_leaf" => p.min_leaf = parse_as(name, value)?,
                "features_per_split" => p.features_per_split = parse_subset_size(value)?,
                _ => return Err(unknown()),
            },
            AlgoParams::Forest(p) => match name {
                "trees" => p.trees = parse_as(name, value)?,
                "min_leaf" => p.min_leaf = parse_as(name, value)?,
                "features_per_split" => p.features_per_split = parse_subset_size(value)?,
                "bootstrap" => p.bootstrap = parse_as(name, value)?,
                _ => return Err(unknown()),
            },
            AlgoParams::NaiveBayes => return Err(unknown()),
            AlgoParams::Logistic(p) => match name {
                "ridge" => p.ridge = parse_as(name, value)?,
                "tolerance" => p.tolerance = parse_as(name, value)?,
                "max_iterations" => p.max_iterations = parse_as(name, value)?,
                _ => return Err(unknown()),
            },
        }
        Ok(())
    }
}

/// A scored class decision. `label` is `Good` exactly when
/// `score >= 0.5`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: Label,
    pub score: f64,
}

impl Prediction {
    /// Builds the prediction from a `Good`-probability score, clamping
    /// it into `[0, 1]`. Non-finite scores are treated as 0.5.
    pub fn from_score(score: f64) -> Prediction {
        let score = if score.is_finite() {
            score.clamp(0.0, 1.0)
        } else {
            0.5
        };
        let label = if score >= 0.5 { Label::Good } else { Label::Bad };
        Prediction { label, score }
    }
}

/// A trained classifier of any family.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    C45Tree(TreeModel),
    RandomTree(TreeModel),
    RandomForest(ForestModel),
    NaiveBayes(NaiveBayesModel),
    Logistic(LogisticModel),
}

impl TrainedModel {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            TrainedModel::C45Tree(_) => Algorithm::C45Tree,
            TrainedModel::RandomTree(_) => Algorithm::RandomTree,
            TrainedModel::RandomForest(_) => Algorithm::RandomForest,
            TrainedModel::NaiveBayes(_) => Algorithm::NaiveBayes,
            TrainedModel::Logistic(_) => Algorithm::Logistic,
        }
    }

    pub fn features(&self) -> &FeatureSet {
        match self {
            TrainedModel::C45Tree(m) | TrainedModel::RandomTree(m) => m.features(),
            TrainedModel::RandomForest(m) => m.features(),
            TrainedModel::NaiveBayes(m) => m.features(),
            TrainedModel::Logistic(m) => m.features(),
        }
    }

    /// Scores the vector and derives the label.
    ///
    /// Panics if the vector is not aligned to the model's feature set.
    pub fn predict(&self, vector: &FeatureVector) -> Prediction {
        let score = match self {
            TrainedModel::C45Tree(m) | TrainedModel::RandomTree(m) => m.score(vector),
            TrainedModel::RandomForest(m) => m.score(vector),
            TrainedModel::NaiveBayes(m) => m.score(vector),
            TrainedModel::Logistic(m) => m.score(vector),
        };
        Prediction::from_score(score)
    }
}

/// Trains one model as the learner spec directs. The learner seed
/// drives every random choice, so equal inputs produce equal models.
pub fn train(spec: &LearnerSpec, dataset: &LabeledDataset) -> Result<TrainedModel, TrainError> {
    match &spec.params {
        AlgoParams::C45(p) => tree::train_c45(dataset, p).map(TrainedModel::C45Tree),
        AlgoParams::RandomTree(p) => {
            tree::train_random_tree(dataset, p, spec.seed).map(TrainedModel::RandomTree)
        }
        AlgoParams::Forest(p) => {
            forest::train_random_forest(dataset, p, spec.seed).map(TrainedModel::RandomForest)
        }
        AlgoParams::NaiveBayes => bayes::train_naive_bayes(dataset).map(TrainedModel::NaiveBayes),
        AlgoParams::Logistic(p) => {
            logistic::train_logistic(dataset, p).map(TrainedModel::Logistic)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureId, FeatureVector};
    use crate::labeling::LabeledExample;
    use crate::snapshot::Quarter;

    fn tiny_dataset() -> LabeledDataset {
        let features = FeatureSet::new(vec![FeatureId::Indicator(0)]).unwrap();
        let rows = [
            (1.0, Label::Bad),
            (2.0, Label::Bad),
            (3.0, Label::Bad),
            (7.0, Label::Good),
            (8.0, Label::Good),
            (9.0, Label::Good),
        ];
        let examples = rows
            .iter()
            .enumerate()
            .map(|(i, (v, label))| LabeledExample {
                vector: FeatureVector::from_encoded(vec![*v]),
                label: *label,
                ticker: format!("T{i}"),
                quarter: Quarter::new(2015, 1).unwrap(),
            })
            .collect();
        LabeledDataset::new(features, examples).unwrap()
    }

    #[test]
    fn algorithm_ids_round_trip() {
        for algo in Algorithm::ALL {
            assert_eq!(algo.as_str().parse::<Algorithm>().unwrap(), algo);
        }
        assert!("j48".parse::<Algorithm>().is_err());
    }

    #[test]
    fn every_algorithm_trains_and_predicts_consistently() {
        let data = tiny_dataset();
        for algo in Algorithm::ALL {
            let spec = LearnerSpec::new(algo, 7);
            let model = train(&spec, &data).unwrap();
            assert_eq!(model.algorithm(), algo);
            for ex in data.examples() {
                let p = model.predict(&ex.vector);
                assert!((0.0..=1.0).contains(&p.score), "{algo}: score {}", p.score);
                assert_eq!(
                    p.label,
                    if p.score >= 0.5 { Label::Good } else { Label::Bad },
                    "{algo}: label inconsistent with score"
                );
            }
        }
    }

    #[test]
    fn prediction_from_score_ties_go_to_good() {
        assert_eq!(Prediction::from_score(0.5).label, Label::Good);
        assert_eq!(Prediction::from_score(0.49999).label, Label::Bad);
        assert_eq!(Prediction::from_score(1.0).label, Label::Good);
        assert_eq!(Prediction::from_score(f64::NAN).label, Label::Good);
        assert_eq!(Prediction::from_score(2.0).score, 1.0);
        assert_eq!(Prediction::from_score(-1.0).score, 0.0);
    }

    #[test]
    fn set_param_accepts_known_names_and_rejects_unknown() {
        let mut spec = LearnerSpec::new(Algorithm::RandomForest, 1);
        spec.set_param("trees", "25").unwrap();
        spec.set_param("min_leaf", "4").unwrap();
        spec.set_param("features_per_split", "3").unwrap();
        spec.set_param("features_per_split", "auto").unwrap();
        spec.set_param("bootstrap", "false").unwrap();
        match &spec.params {
            AlgoParams::Forest(p) => {
                assert_eq!(p.trees, 25);
                assert_eq!(p.min_leaf, 4);
                assert_eq!(p.features_per_split, None);
                assert!(!p.bootstrap);
            }
            other => panic!("wrong params variant: {other:?}"),
        }
        assert!(spec.set_param("confidence", "0.3").is_err());
        assert!(spec.set_param("trees", "many").is_err());

        let mut c45 = LearnerSpec::new(Algorithm::C45Tree, 1);
        c45.set_param("confidence", "0.1").unwrap();
        c45.set_param("prune", "false").unwrap();
        assert!(c45.set_param("trees", "10").is_err());

        let mut nb = LearnerSpec::new(Algorithm::NaiveBayes, 1);
        assert!(nb.set_param("anything", "1").is_err());

        let mut logit = LearnerSpec::new(Algorithm::Logistic, 1);
        logit.set_param("ridge", "0.001").unwrap();
        logit.set_param("max_iterations", "50").unwrap();
        assert!(logit.set_param("min_leaf", "2").is_err());
    }

    #[test]
    fn same_spec_same_data_same_model() {
        let data = tiny_dataset();
        for algo in Algorithm::ALL {
            let spec = LearnerSpec::new(algo, 99);
            let a = train(&spec, &data).unwrap();
            let b = train(&spec, &data).unwrap();
            assert_eq!(a, b, "{algo} retrained differently from equal inputs");
        }
    }
}
