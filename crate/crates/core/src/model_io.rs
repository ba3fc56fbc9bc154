//! Versioned, canonical text persistence for trained models.
//!
//! The format is line-oriented and deterministic: saving the same
//! model with the same metadata always produces identical bytes, so
//! artifacts can be compared by digest. A version header is checked on
//! load and unknown versions are rejected, never migrated. Floating
//! point values are written in Rust's shortest round-trip decimal
//! form, so reloading reproduces every parameter bit-for-bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::features::{FeatureId, FeatureSet};
use crate::labeling::LabeledDataset;
use crate::learners::bayes::{GaussianPair, NaiveBayesModel};
use crate::learners::forest::{ForestModel, ForestParams};
use crate::learners::logistic::{LogisticModel, LogisticParams};
use crate::learners::tree::{MissingPolicy, TreeModel, TreeNode, TreeParams};
use crate::learners::{Algorithm, TrainedModel};
use crate::snapshot::SchemaConfig;

const FORMAT_HEADER: &str = "equicast-model v1";

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("cannot access model file: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported model file version: {0:?} (this build reads {FORMAT_HEADER:?})")]
    UnsupportedVersion(String),
    #[error("malformed model file at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("model file holds an invalid model: {0}")]
    Invalid(String),
}

/// Provenance recorded alongside the model parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelMetadata {
    /// Seed of the learner spec that trained the model.
    pub seed: u64,
    /// Hex digest of the canonical training-dataset bytes ("-" when
    /// the dataset was not captured).
    pub dataset_digest: String,
    /// Build timestamp (seconds); see [`build_timestamp`].
    pub trained_at: u64,
}

impl ModelMetadata {
    pub fn new(seed: u64, dataset_digest: String) -> ModelMetadata {
        ModelMetadata {
            seed,
            dataset_digest,
            trained_at: build_timestamp(),
        }
    }
}

/// Timestamp stamped into saved models: the SOURCE_DATE_EPOCH
/// environment variable when set, otherwise 0. Wall-clock time is
/// never used, so identical runs produce identical artifacts.
pub fn build_timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0)
}

/// Lowercase hex SHA-256 of arbitrary bytes.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        let _ = write!(out, "{byte:02x}");
    }
    out
}

/// Digest of a labeled dataset's canonical file form; recorded in
/// model metadata so a model can be traced to its training data.
pub fn dataset_digest(dataset: &LabeledDataset) -> String {
    let mut bytes = Vec::new();
    crate::labeling::write_labeled(&mut bytes, dataset, &SchemaConfig::default())
        .expect("writing to memory cannot fail");
    sha256_hex(&bytes)
}

fn subset_size_token(value: Option<usize>) -> String {
    match value {
        None => "auto".to_string(),
        Some(k) => k.to_string(),
    }
}

fn write_tree_nodes(out: &mut String, model: &TreeModel) {
    let _ = writeln!(out, "nodes {}", model.nodes().len());
    for node in model.nodes() {
        match node {
            TreeNode::Split {
                feature,
                threshold,
                missing,
                left,
                right,
            } => {
                let policy = match missing {
                    MissingPolicy::ToLeft => "left",
                    MissingPolicy::ToRight => "right",
                };
                let _ = writeln!(out, "node split {feature} {threshold} {policy} {left} {right}");
            }
            TreeNode::Leaf { good, bad } => {
                let _ = writeln!(out, "node leaf {good} {bad}");
            }
        }
    }
}

fn write_tree_params(out: &mut String, params: &TreeParams) {
    let _ = writeln!(
        out,
        "params min_leaf {} confidence {} prune {} features_per_split {}",
        params.min_leaf,
        params.confidence,
        params.prune,
        subset_size_token(params.features_per_split)
    );
}

/// Renders the model and its metadata in the canonical text form.
pub fn model_to_string(model: &TrainedModel, metadata: &ModelMetadata) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{FORMAT_HEADER}");
    let _ = writeln!(out, "algorithm {}", model.algorithm());
    let _ = writeln!(out, "seed {}", metadata.seed);
    let digest = if metadata.dataset_digest.is_empty() {
        "-"
    } else {
        metadata.dataset_digest.as_str()
    };
    let _ = writeln!(out, "dataset_digest {digest}");
    let _ = writeln!(out, "trained_at {}", metadata.trained_at);
    let features = model.features();
    let _ = writeln!(out, "features {}", features.len());
    for name in features.names() {
        let _ = writeln!(out, "feature {name}");
    }
    match model {
        TrainedModel::C45Tree(tree) | TrainedModel::RandomTree(tree) => {
            write_tree_params(&mut out, tree.params());
            write_tree_nodes(&mut out, tree);
        }
        TrainedModel::RandomForest(forest) => {
            let params = forest.params();
            let _ = writeln!(
                out,
                "params trees {} min_leaf {} features_per_split {} bootstrap {}",
                params.trees,
                params.min_leaf,
                subset_size_token(params.features_per_split),
                params.bootstrap
            );
            let _ = writeln!(out, "forest_seed {}", forest.seed());
            let _ = writeln!(out, "trees {}", forest.trees().len());
            for (i, tree) in forest.trees().iter().enumerate() {
                let _ = writeln!(out, "tree {i}");
                write_tree_nodes(&mut out, tree);
            }
        }
        TrainedModel::NaiveBayes(bayes) => {
            let _ = writeln!(out, "params default");
            let _ = writeln!(out, "prior_good {}", bayes.prior_good());
            for (i, stat) in bayes.stats().iter().enumerate() {
                match stat {
                    Some(pair) => {
                        let _ = writeln!(
                            out,
                            "gauss {i} on {} {} {} {}",
                            pair.good_mean, pair.good_var, pair.bad_mean, pair.bad_var
                        );
                    }
                    None => {
                        let _ = writeln!(out, "gauss {i} off");
                    }
                }
            }
        }
        TrainedModel::Logistic(logit) => {
            let params = logit.params();
            let _ = writeln!(
                out,
                "params ridge {} tolerance {} max_iterations {}",
                params.ridge, params.tolerance, params.max_iterations
            );
            let _ = writeln!(out, "intercept {}", logit.intercept());
            let _ = writeln!(out, "fit {} {}", logit.converged(), logit.iterations());
            for i in 0..features.len() {
                let _ = writeln!(
                    out,
                    "coef {i} {} {} {} {}",
                    logit.weights()[i],
                    logit.centers()[i],
                    logit.scales()[i],
                    logit.imputations()[i]
                );
            }
        }
    }
    let _ = writeln!(out, "end");
    out
}

/// Line cursor with one-token lookahead errors carrying line numbers.
struct Cursor<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    current: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Cursor<'a> {
        Cursor {
            lines: text.lines().enumerate(),
            current: 0,
        }
    }

    fn fail<T>(&self, reason: impl Into<String>) -> Result<T, ModelIoError> {
        Err(ModelIoError::Malformed {
            line: self.current,
            reason: reason.into(),
        })
    }

    fn next_line(&mut self) -> Result<&'a str, ModelIoError> {
        match self.lines.next() {
            Some((i, line)) => {
                self.current = i + 1;
                Ok(line)
            }
            None => {
                self.current += 1;
                self.fail("unexpected end of file")
            }
        }
    }

    /// Next line split into tokens, with the first required to be `tag`.
    fn tagged(&mut self, tag: &str) -> Result<Vec<&'a str>, ModelIoError> {
        let line = self.next_line()?;
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some(t) if t == tag => Ok(tokens.collect()),
            Some(other) => self.fail(format!("expected a {tag:?} line, found {other:?}")),
            None => self.fail(format!("expected a {tag:?} line, found a blank line")),
        }
    }

    fn parse<T: std::str::FromStr>(&self, token: Option<&str>, what: &str) -> Result<T, ModelIoError> {
        match token {
            Some(t) => t
                .parse()
                .or_else(|_| self.fail(format!("cannot parse {t:?} as {what}"))),
            None => self.fail(format!("missing {what}")),
        }
    }

    fn done(&mut self) -> Result<(), ModelIoError> {
        if let Some((i, line)) = self.lines.next() {
            if !line.trim().is_empty() {
                self.current = i + 1;
                return self.fail("trailing content after the end marker");
            }
        }
        Ok(())
    }
}

fn parse_subset_size(cursor: &Cursor, token: Option<&str>) -> Result<Option<usize>, ModelIoError> {
    match token {
        Some("auto") => Ok(None),
        other => cursor.parse::<usize>(other, "a feature-subset size").map(Some),
    }
}

fn parse_tree_nodes(cursor: &mut Cursor) -> Result<Vec<TreeNode>, ModelIoError> {
    let count_tokens = cursor.tagged("nodes")?;
    let count: usize = cursor.parse(count_tokens.first().copied(), "a node count")?;
    let mut nodes = Vec::with_capacity(count);
    for _ in 0..count {
        let tokens = cursor.tagged("node")?;
        match tokens.first().copied() {
            Some("split") => {
                let feature: u32 = cursor.parse(tokens.get(1).copied(), "a feature index")?;
                let threshold: f64 = cursor.parse(tokens.get(2).copied(), "a threshold")?;
                let missing = match tokens.get(3).copied() {
                    Some("left") => MissingPolicy::ToLeft,
                    Some("right") => MissingPolicy::ToRight,
                    other => {
                        return cursor
                            .fail(format!("expected a missing policy left/right, found {other:?}"))
                    }
                };
                let left: u32 = cursor.parse(tokens.get(4).copied(), "a child index")?;
                let right: u32 = cursor.parse(tokens.get(5).copied(), "a child index")?;
                nodes.push(TreeNode::Split {
                    feature,
                    threshold,
                    missing,
                    left,
                    right,
                });
            }
            Some("leaf") => {
                let good: u32 = cursor.parse(tokens.get(1).copied(), "a class count")?;
                let bad: u32 = cursor.parse(tokens.get(2).copied(), "a class count")?;
                nodes.push(TreeNode::Leaf { good, bad });
            }
            other => return cursor.fail(format!("unknown node kind {other:?}")),
        }
    }
    Ok(nodes)
}

fn parse_tree_params(cursor: &mut Cursor) -> Result<TreeParams, ModelIoError> {
    let tokens = cursor.tagged("params")?;
    let expect_key = |cursor: &Cursor, got: Option<&str>, key: &str| -> Result<(), ModelIoError> {
        if got == Some(key) {
            Ok(())
        } else {
            cursor.fail(format!("expected parameter {key:?}, found {got:?}"))
        }
    };
    expect_key(cursor, tokens.first().copied(), "min_leaf")?;
    let min_leaf: usize = cursor.parse(tokens.get(1).copied(), "a leaf size")?;
    expect_key(cursor, tokens.get(2).copied(), "confidence")?;
    let confidence: f64 = cursor.parse(tokens.get(3).copied(), "a confidence level")?;
    expect_key(cursor, tokens.get(4).copied(), "prune")?;
    let prune: bool = cursor.parse(tokens.get(5).copied(), "a boolean")?;
    expect_key(cursor, tokens.get(6).copied(), "features_per_split")?;
    let features_per_split = parse_subset_size(cursor, tokens.get(7).copied())?;
    Ok(TreeParams {
        min_leaf,
        confidence,
        prune,
        features_per_split,
    })
}

/// Parses the canonical text form back into a model and its metadata.
pub fn model_from_str(text: &str) -> Result<(TrainedModel, ModelMetadata), ModelIoError> {
    let mut cursor = Cursor::new(text);
    let header = cursor.next_line()?;
    if header != FORMAT_HEADER {
        return Err(ModelIoError::UnsupportedVersion(header.to_string()));
    }

    let algo_tokens = cursor.tagged("algorithm")?;
    let algorithm: Algorithm = cursor.parse(algo_tokens.first().copied(), "an algorithm id")?;
    let seed_tokens = cursor.tagged("seed")?;
    let seed: u64 = cursor.parse(seed_tokens.first().copied(), "a seed")?;
    let digest_tokens = cursor.tagged("dataset_digest")?;
    let dataset_digest = match digest_tokens.first().copied() {
        Some("-") => String::new(),
        Some(d) => d.to_string(),
        None => return cursor.fail("missing dataset digest"),
    };
    let ts_tokens = cursor.tagged("trained_at")?;
    let trained_at: u64 = cursor.parse(ts_tokens.first().copied(), "a timestamp")?;

    let count_tokens = cursor.tagged("features")?;
    let count: usize = cursor.parse(count_tokens.first().copied(), "a feature count")?;
    let mut names = Vec::with_capacity(count);
    for _ in 0..count {
        let tokens = cursor.tagged("feature")?;
        match tokens.first().copied() {
            Some(name) => names.push(name),
            None => return cursor.fail("missing feature id"),
        }
    }
    let ids = names
        .iter()
        .map(|name| {
            FeatureId::parse(name)
                .ok_or_else(|| ModelIoError::Invalid(format!("unknown feature id {name:?}")))
        })
        .collect::<Result<Vec<FeatureId>, ModelIoError>>()?;
    let features = FeatureSet::new(ids).map_err(|e| ModelIoError::Invalid(e.to_string()))?;
    // The set orders members canonically; serialized indices are only
    // meaningful if the file listed features in that same order.
    if features.names().collect::<Vec<_>>() != names {
        return Err(ModelIoError::Invalid(
            "feature list is not in canonical order".to_string(),
        ));
    }

    let model = match algorithm {
        Algorithm::C45Tree | Algorithm::RandomTree => {
            let params = parse_tree_params(&mut cursor)?;
            let nodes = parse_tree_nodes(&mut cursor)?;
            let tree = TreeModel::from_parts(nodes, features, params)
                .map_err(ModelIoError::Invalid)?;
            if algorithm == Algorithm::C45Tree {
                TrainedModel::C45Tree(tree)
            } else {
                TrainedModel::RandomTree(tree)
            }
        }
        Algorithm::RandomForest => {
            let tokens = cursor.tagged("params")?;
            if tokens.first().copied() != Some("trees") {
                return cursor.fail("expected parameter \"trees\"");
            }
            let trees_count: usize = cursor.parse(tokens.get(1).copied(), "a tree count")?;
            if tokens.get(2).copied() != Some("min_leaf") {
                return cursor.fail("expected parameter \"min_leaf\"");
            }
            let min_leaf: usize = cursor.parse(tokens.get(3).copied(), "a leaf size")?;
            if tokens.get(4).copied() != Some("features_per_split") {
                return cursor.fail("expected parameter \"features_per_split\"");
            }
            let features_per_split = parse_subset_size(&cursor, tokens.get(5).copied())?;
            if tokens.get(6).copied() != Some("bootstrap") {
                return cursor.fail("expected parameter \"bootstrap\"");
            }
            let bootstrap: bool = cursor.parse(tokens.get(7).copied(), "a boolean")?;
            let params = ForestParams {
                trees: trees_count,
                min_leaf,
                features_per_split,
                bootstrap,
            };
            let seed_tokens = cursor.tagged("forest_seed")?;
            let forest_seed: u64 = cursor.parse(seed_tokens.first().copied(), "a seed")?;
            let count_tokens = cursor.tagged("trees")?;
            let n_trees: usize = cursor.parse(count_tokens.first().copied(), "a tree count")?;
            let tree_params = TreeParams {
                min_leaf,
                confidence: 0.0,
                prune: false,
                features_per_split,
            };
            let mut trees = Vec::with_capacity(n_trees);
            for i in 0..n_trees {
                let tokens = cursor.tagged("tree")?;
                let index: usize = cursor.parse(tokens.first().copied(), "a tree index")?;
                if index != i {
                    return cursor.fail(format!("tree blocks out of order: expected {i}, found {index}"));
                }
                let nodes = parse_tree_nodes(&mut cursor)?;
                // Stored per-tree parameters mirror how training
                // stamps them; the resolved subset size is re-derived
                // on load from the forest parameters.
                let tree = TreeModel::from_parts(
                    nodes,
                    features.clone(),
                    TreeParams {
                        features_per_split: Some(
                            tree_params
                                .features_per_split
                                .unwrap_or_else(|| {
                                    crate::learners::tree::default_features_per_split(
                                        features.len(),
                                    )
                                })
                                .min(features.len()),
                        ),
                        ..tree_params
                    },
                )
                .map_err(ModelIoError::Invalid)?;
                trees.push(tree);
            }
            let forest = ForestModel::from_parts(trees, features, forest_seed, params)
                .map_err(ModelIoError::Invalid)?;
            TrainedModel::RandomForest(forest)
        }
        Algorithm::NaiveBayes => {
            let tokens = cursor.tagged("params")?;
            if tokens.first().copied() != Some("default") {
                return cursor.fail("expected the parameter marker \"default\"");
            }
            let prior_tokens = cursor.tagged("prior_good")?;
            let prior_good: f64 = cursor.parse(prior_tokens.first().copied(), "a prior")?;
            let mut stats = Vec::with_capacity(features.len());
            for i in 0..features.len() {
                let tokens = cursor.tagged("gauss")?;
                let index: usize = cursor.parse(tokens.first().copied(), "a feature index")?;
                if index != i {
                    return cursor
                        .fail(format!("gauss lines out of order: expected {i}, found {index}"));
                }
                match tokens.get(1).copied() {
                    Some("on") => {
                        let good_mean: f64 = cursor.parse(tokens.get(2).copied(), "a mean")?;
                        let good_var: f64 = cursor.parse(tokens.get(3).copied(), "a variance")?;
                        let bad_mean: f64 = cursor.parse(tokens.get(4).copied(), "a mean")?;
                        let bad_var: f64 = cursor.parse(tokens.get(5).copied(), "a variance")?;
                        stats.push(Some(GaussianPair {
                            good_mean,
                            good_var,
                            bad_mean,
                            bad_var,
                        }));
                    }
                    Some("off") => stats.push(None),
                    other => {
                        return cursor.fail(format!("expected on/off, found {other:?}"));
                    }
                }
            }
            let bayes = NaiveBayesModel::from_parts(features, prior_good, stats)
                .map_err(ModelIoError::Invalid)?;
            TrainedModel::NaiveBayes(bayes)
        }
        Algorithm::Logistic => {
            let tokens = cursor.tagged("params")?;
            if tokens.first().copied() != Some("ridge") {
                return cursor.fail("expected parameter \"ridge\"");
            }
            let ridge: f64 = cursor.parse(tokens.get(1).copied(), "a ridge strength")?;
            if tokens.get(2).copied() != Some("tolerance") {
                return cursor.fail("expected parameter \"tolerance\"");
            }
            let tolerance: f64 = cursor.parse(tokens.get(3).copied(), "a tolerance")?;
            if tokens.get(4).copied() != Some("max_iterations") {
                return cursor.fail("expected parameter \"max_iterations\"");
            }
            let max_iterations: usize =
                cursor.parse(tokens.get(5).copied(), "an iteration cap")?;
            let intercept_tokens = cursor.tagged("intercept")?;
            let intercept: f64 = cursor.parse(intercept_tokens.first().copied(), "an intercept")?;
            let fit_tokens = cursor.tagged("fit")?;
            let converged: bool = cursor.parse(fit_tokens.first().copied(), "a boolean")?;
            let iterations: usize =
                cursor.parse(fit_tokens.get(1).copied(), "an iteration count")?;
            let n = features.len();
            let (mut weights, mut centers, mut scales, mut imputations) = (
                Vec::with_capacity(n),
                Vec::with_capacity(n),
                Vec::with_capacity(n),
                Vec::with_capacity(n),
            );
            for i in 0..n {
                let tokens = cursor.tagged("coef")?;
                let index: usize = cursor.parse(tokens.first().copied(), "a feature index")?;
                if index != i {
                    return cursor
                        .fail(format!("coef lines out of order: expected {i}, found {index}"));
                }
                weights.push(cursor.parse(tokens.get(1).copied(), "a weight")?);
                centers.push(cursor.parse(tokens.get(2).copied(), "a center")?);
                scales.push(cursor.parse(tokens.get(3).copied(), "a scale")?);
                imputations.push(cursor.parse(tokens.get(4).copied(), "an imputation value")?);
            }
            let logit = LogisticModel::from_parts(
                features,
                weights,
                intercept,
                centers,
                scales,
                imputations,
                converged,
                iterations,
                LogisticParams {
                    ridge,
                    tolerance,
                    max_iterations,
                },
            )
            .map_err(ModelIoError::Invalid)?;
            TrainedModel::Logistic(logit)
        }
    };

    let end = cursor.next_line()?;
    if end != "end" {
        return Err(ModelIoError::Malformed {
            line: 0,
            reason: format!("expected the end marker, found {end:?}"),
        });
    }
    cursor.done()?;

    Ok((
        model,
        ModelMetadata {
            seed,
            dataset_digest,
            trained_at,
        },
    ))
}

/// Writes the canonical model file and returns its content digest.
pub fn save_model(
    model: &TrainedModel,
    metadata: &ModelMetadata,
    path: impl AsRef<Path>,
) -> Result<String, ModelIoError> {
    let text = model_to_string(model, metadata);
    fs::write(path, text.as_bytes())?;
    Ok(sha256_hex(text.as_bytes()))
}

/// Loads a model file, rejecting unknown versions and invalid models.
pub fn load_model(path: impl AsRef<Path>) -> Result<(TrainedModel, ModelMetadata), ModelIoError> {
    let text = fs::read_to_string(path)?;
    model_from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureVector, SENTINEL};
    use crate::labeling::{Label, LabeledExample};
    use crate::learners::{train, LearnerSpec};
    use crate::seeds;
    use crate::snapshot::Quarter;
    use rand::Rng;

    fn training_dataset() -> LabeledDataset {
        let features = FeatureSet::new(vec![
            FeatureId::Indicator(0),
            FeatureId::Indicator(3),
            FeatureId::HistoryPrice,
        ])
        .unwrap();
        let mut rng = seeds::stream(400, "model-io-fixture", 0);
        let examples = (0..60)
            .map(|i| {
                let x: f64 = rng.gen_range(-4.0..4.0);
                let y: f64 = rng.gen_range(-4.0..4.0);
                let z: f64 = rng.gen_range(10.0..90.0);
                let label = if x + 0.5 * y > 0.0 { Label::Good } else { Label::Bad };
                let x = if i % 11 == 0 { SENTINEL } else { x };
                LabeledExample {
                    vector: FeatureVector::from_encoded(vec![x, y, z]),
                    label,
                    ticker: format!("T{i:02}"),
                    quarter: Quarter::new(2013, 3).unwrap(),
                }
            })
            .collect();
        LabeledDataset::new(features, examples).unwrap()
    }

    fn probe_vectors(n: usize) -> Vec<FeatureVector> {
        let mut rng = seeds::stream(401, "model-io-probes", 0);
        (0..n)
            .map(|_| {
                let mut values = vec![
                    rng.gen_range(-6.0..6.0),
                    rng.gen_range(-6.0..6.0),
                    rng.gen_range(5.0..120.0),
                ];
                if rng.gen::<f64>() < 0.2 {
                    values[rng.gen_range(0..3)] = SENTINEL;
                }
                FeatureVector::from_encoded(values)
            })
            .collect()
    }

    fn metadata() -> ModelMetadata {
        ModelMetadata {
            seed: 7,
            dataset_digest: "ab".repeat(32),
            trained_at: 0,
        }
    }

    #[test]
    fn every_algorithm_round_trips_with_identical_predictions() {
        let data = training_dataset();
        let probes = probe_vectors(100);
        for algo in crate::learners::Algorithm::ALL {
            let mut spec = LearnerSpec::new(algo, 7);
            if algo == crate::learners::Algorithm::RandomForest {
                spec.set_param("trees", "12").unwrap();
            }
            let model = train(&spec, &data).unwrap();
            let text = model_to_string(&model, &metadata());
            let (loaded, loaded_meta) = model_from_str(&text).unwrap();
            assert_eq!(loaded_meta, metadata(), "{algo}: metadata drifted");
            assert_eq!(loaded.algorithm(), algo);
            for probe in &probes {
                let a = model.predict(probe);
                let b = loaded.predict(probe);
                assert_eq!(a.label, b.label, "{algo}: label drifted");
                assert_eq!(
                    a.score.to_bits(),
                    b.score.to_bits(),
                    "{algo}: score drifted on reload"
                );
            }
        }
    }

    #[test]
    fn saving_twice_is_byte_identical() {
        let data = training_dataset();
        let model = train(&LearnerSpec::new(crate::learners::Algorithm::C45Tree, 3), &data)
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path_a = dir.path().join("a.model");
        let path_b = dir.path().join("b.model");
        let digest_a = save_model(&model, &metadata(), &path_a).unwrap();
        let digest_b = save_model(&model, &metadata(), &path_b).unwrap();
        assert_eq!(digest_a, digest_b);
        assert_eq!(fs::read(&path_a).unwrap(), fs::read(&path_b).unwrap());
        let (loaded, _) = load_model(&path_a).unwrap();
        assert_eq!(loaded, model);
    }

    #[test]
    fn bumped_version_is_rejected() {
        let data = training_dataset();
        let model = train(&LearnerSpec::new(crate::learners::Algorithm::NaiveBayes, 3), &data)
            .unwrap();
        let text = model_to_string(&model, &metadata());
        let bumped = text.replace("equicast-model v1", "equicast-model v2");
        match model_from_str(&bumped) {
            Err(ModelIoError::UnsupportedVersion(header)) => {
                assert!(header.contains("v2"));
            }
            other => panic!("expected a version error, got {other:?}"),
        }
    }

    #[test]
    fn corrupted_files_are_rejected_not_half_loaded() {
        let data = training_dataset();
        let model = train(&LearnerSpec::new(crate::learners::Algorithm::C45Tree, 3), &data)
            .unwrap();
        let text = model_to_string(&model, &metadata());

        // A split pointing past the node arena.
        let corrupt = text.replace("node split 0 ", "node split 77 ");
        assert!(matches!(
            model_from_str(&corrupt),
            Err(ModelIoError::Invalid(_)) | Err(ModelIoError::Malformed { .. })
        ));

        // Features listed out of canonical order.
        let swapped = text
            .replace("feature book_value", "feature ZZZ")
            .replace("feature net_price_pct_change_1m", "feature book_value")
            .replace("feature ZZZ", "feature net_price_pct_change_1m");
        assert!(matches!(swapped_err(&swapped), ModelIoError::Invalid(_)));

        // Truncated payload.
        let truncated: String = text.lines().take(8).map(|l| format!("{l}\n")).collect();
        assert!(matches!(
            model_from_str(&truncated),
            Err(ModelIoError::Malformed { .. })
        ));
    }

    fn swapped_err(text: &str) -> ModelIoError {
        model_from_str(text).expect_err("tampered feature order must not load")
    }

    #[test]
    fn dataset_digest_tracks_content() {
        let data = training_dataset();
        assert_eq!(dataset_digest(&data), dataset_digest(&data));
        let flipped = LabeledDataset::new(
            data.features().clone(),
            data.examples()
                .iter()
                .cloned()
                .map(|mut ex| {
                    if ex.ticker == "T00" {
                        ex.label = match ex.label {
                            Label::Good => Label::Bad,
                            Label::Bad => Label::Good,
                        };
                    }
                    ex
                })
                .collect(),
        )
        .unwrap();
        assert_ne!(dataset_digest(&data), dataset_digest(&flipped));
        assert_eq!(dataset_digest(&data).len(), 64);
    }

    #[test]
    fn timestamps_come_from_the_environment_or_zero() {
        // Serialized artifacts must not depend on wall-clock time.
        std::env::remove_var("SOURCE_DATE_EPOCH");
        assert_eq!(build_timestamp(), 0);
        std::env::set_var("SOURCE_DATE_EPOCH", "1700000000");
        assert_eq!(build_timestamp(), 1700000000);
        std::env::remove_var("SOURCE_DATE_EPOCH");
        let meta = ModelMetadata::new(5, String::new());
        assert_eq!(meta.trained_at, 0);
    }
}
