//! Decision-tree learners: gain-ratio induction with binary midpoint
//! splits, pessimistic-error pruning, and a per-node random-subspace
//! variant.
//!
//! Trees are stored as a flat arena of nodes; node 0 is the root and
//! children always have larger indices than their parent. Missing values
//! never produce split thresholds and are routed to the child that
//! received the majority of the node's training rows.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use statrs::function::beta::beta_reg;

use crate::features::{FeatureSet, FeatureVector, SENTINEL};
use crate::labeling::{Label, LabeledDataset};
use crate::learners::criterion::gain_and_ratio_from_counts;
use crate::learners::TrainError;
use crate::seeds;

/// Information gain below this is treated as no gain at all.
const GAIN_EPS: f64 = 1e-12;

/// Where rows with a missing split value are routed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissingPolicy {
    ToLeft,
    ToRight,
}

/// One arena node: an internal binary split or a class-count leaf.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Split {
        feature: u32,
        threshold: f64,
        missing: MissingPolicy,
        left: u32,
        right: u32,
    },
    Leaf {
        good: u32,
        bad: u32,
    },
}

/// Hyperparameters recorded on a trained tree.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeParams {
    pub min_leaf: usize,
    pub confidence: f64,
    pub prune: bool,
    /// `Some(k)` when splits considered a random k-feature subset.
    pub features_per_split: Option<usize>,
}

/// Hyperparameters for the pruned gain-ratio tree.
#[derive(Debug, Clone, PartialEq)]
pub struct C45Params {
    /// Minimum training rows with a present value on each side of a split.
    pub min_leaf: usize,
    /// Confidence factor for the pessimistic error bound, in (0, 0.5].
    pub confidence: f64,
    /// Whether to prune after induction.
    pub prune: bool,
}

impl Default for C45Params {
    fn default() -> Self {
        C45Params {
            min_leaf: 2,
            confidence: 0.25,
            prune: true,
        }
    }
}

/// Hyperparameters for the random-subspace tree (never pruned).
#[derive(Debug, Clone, PartialEq)]
pub struct RandomTreeParams {
    pub min_leaf: usize,
    /// Features drawn per node; `None` means floor(log2 F) + 1.
    pub features_per_split: Option<usize>,
}

impl Default for RandomTreeParams {
    fn default() -> Self {
        RandomTreeParams {
            min_leaf: 2,
            features_per_split: None,
        }
    }
}

/// The default per-node feature-subset size: floor(log2 F) + 1.
pub fn default_features_per_split(n_features: usize) -> usize {
    ((n_features.max(1) as f64).log2().floor() as usize + 1).min(n_features.max(1))
}

/// A trained decision tree.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    nodes: Vec<TreeNode>,
    features: FeatureSet,
    params: TreeParams,
}

impl TreeModel {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn features(&self) -> &FeatureSet {
        &self.features
    }

    pub fn params(&self) -> &TreeParams {
        &self.params
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }

    /// Probability assigned to `Good`: the leaf's Good proportion.
    ///
    /// Panics if the vector is not aligned to the model's feature set.
    pub fn score(&self, vector: &FeatureVector) -> f64 {
        assert_eq!(
            vector.len(),
            self.features.len(),
            "vector not aligned to the model's feature set"
        );
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { good, bad } => {
                    return *good as f64 / (*good + *bad) as f64;
                }
                TreeNode::Split {
                    feature,
                    threshold,
                    missing,
                    left,
                    right,
                } => {
                    let f = *feature as usize;
                    let go_left = if vector.is_missing(f) {
                        *missing == MissingPolicy::ToLeft
                    } else {
                        vector.values()[f] <= *threshold
                    };
                    i = if go_left { *left } else { *right } as usize;
                }
            }
        }
    }

    /// Rebuilds a model from its serialized parts, enforcing structural
    /// invariants (ordered child indices make cycles impossible).
    pub(crate) fn from_parts(
        nodes: Vec<TreeNode>,
        features: FeatureSet,
        params: TreeParams,
    ) -> Result<TreeModel, String> {
        validate_nodes(&nodes, features.len())?;
        Ok(TreeModel {
            nodes,
            features,
            params,
        })
    }
}

pub(crate) fn validate_nodes(nodes: &[TreeNode], n_features: usize) -> Result<(), String> {
    if nodes.is_empty() {
        return Err("tree has no nodes".to_string());
    }
    for (i, node) in nodes.iter().enumerate() {
        match node {
            TreeNode::Leaf { good, bad } => {
                if *good == 0 && *bad == 0 {
                    return Err(format!("leaf {i} has no class counts"));
                }
            }
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
                ..
            } => {
                if *feature as usize >= n_features {
                    return Err(format!("split {i} uses feature {feature} out of range"));
                }
                if !threshold.is_finite() || *threshold == SENTINEL {
                    return Err(format!("split {i} has invalid threshold {threshold}"));
                }
                for child in [left, right] {
                    if *child as usize >= nodes.len() || *child as usize <= i {
                        return Err(format!("split {i} has out-of-order child {child}"));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Column-major training view shared by the tree learners. Values are
/// sentinel-encoded.
pub(crate) struct Columns {
    values: Vec<Vec<f64>>,
    labels: Vec<Label>,
}

impl Columns {
    pub(crate) fn from_dataset(dataset: &LabeledDataset) -> Columns {
        let n_features = dataset.features().len();
        let mut values = vec![Vec::with_capacity(dataset.len()); n_features];
        let mut labels = Vec::with_capacity(dataset.len());
        for ex in dataset.examples() {
            for (f, column) in values.iter_mut().enumerate() {
                column.push(ex.vector.values()[f]);
            }
            labels.push(ex.label);
        }
        Columns { values, labels }
    }

    fn n_features(&self) -> usize {
        self.values.len()
    }
}

struct GrowParams {
    min_leaf: usize,
    features_per_split: Option<usize>,
}

struct BestSplit {
    ratio: f64,
    feature: usize,
    threshold: f64,
    to_left: bool,
}

/// The best admissible split on one feature: (threshold, gain, ratio,
/// left-present, right-present). Thresholds are midpoints between
/// adjacent distinct present values; the sentinel is never a threshold.
fn best_split_for_feature(
    column: &[f64],
    labels: &[Label],
    rows: &[u32],
    min_leaf: usize,
    scratch: &mut Vec<(f64, Label)>,
) -> Option<(f64, f64, usize, usize)> {
    scratch.clear();
    let mut total_good = 0usize;
    let mut total_bad = 0usize;
    for &r in rows {
        let v = column[r as usize];
        if v != SENTINEL {
            let label = labels[r as usize];
            match label {
                Label::Good => total_good += 1,
                Label::Bad => total_bad += 1,
            }
            scratch.push((v, label));
        }
    }
    let m = scratch.len();
    if m < 2 * min_leaf {
        return None;
    }
    scratch.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut best: Option<(f64, f64, f64, usize, usize)> = None; // ratio, gain, t, ln, rn
    let mut left_good = 0usize;
    let mut left_bad = 0usize;
    for i in 0..m - 1 {
        match scratch[i].1 {
            Label::Good => left_good += 1,
            Label::Bad => left_bad += 1,
        }
        let (lo, hi) = (scratch[i].0, scratch[i + 1].0);
        if lo == hi {
            continue;
        }
        let left_n = i + 1;
        let right_n = m - left_n;
        if left_n < min_leaf || right_n < min_leaf {
            continue;
        }
        // Midpoint, computed overflow-free; if rounding lands it on the
        // upper value, fall back to the lower value so the partition
        // stays "<= threshold".
        let mut t = lo + (hi - lo) / 2.0;
        if t >= hi {
            t = lo;
        }
        if t == SENTINEL {
            continue;
        }
        let (gain, ratio) = gain_and_ratio_from_counts(
            left_good,
            left_bad,
            total_good - left_good,
            total_bad - left_bad,
        );
        if gain <= GAIN_EPS {
            continue;
        }
        // Strict > keeps the lowest threshold on ties.
        if best.is_none_or(|b| ratio > b.0) {
            best = Some((ratio, gain, t, left_n, right_n));
        }
    }
    best.map(|(ratio, _gain, t, ln, rn)| (t, ratio, ln, rn))
}

/// Grows a tree over `rows` (row ids into `columns`, duplicates allowed
/// for bootstrap resamples). When `rng` is given together with a subset
/// size in `params`, each node considers only that many randomly drawn
/// features, in ascending index order.
fn grow_tree(
    columns: &Columns,
    root_rows: Vec<u32>,
    params: &GrowParams,
    mut rng: Option<&mut ChaCha8Rng>,
) -> Vec<TreeNode> {
    let n_features = columns.n_features();
    let mut nodes: Vec<TreeNode> = vec![TreeNode::Leaf { good: 0, bad: 0 }];
    let mut stack: Vec<(Vec<u32>, u32)> = vec![(root_rows, 0)];
    let mut scratch: Vec<(f64, Label)> = Vec::new();
    let mut pool: Vec<usize> = (0..n_features).collect();
    let mut candidates: Vec<usize> = Vec::new();

    while let Some((rows, slot)) = stack.pop() {
        let good = rows
            .iter()
            .filter(|r| columns.labels[**r as usize] == Label::Good)
            .count();
        let bad = rows.len() - good;

        let make_leaf = |nodes: &mut Vec<TreeNode>| {
            nodes[slot as usize] = TreeNode::Leaf {
                good: good as u32,
                bad: bad as u32,
            };
        };
        if good == 0 || bad == 0 || rows.len() < 2 * params.min_leaf {
            make_leaf(&mut nodes);
            continue;
        }

        candidates.clear();
        match (params.features_per_split, rng.as_deref_mut()) {
            (Some(k), Some(rng)) => {
                let k = k.clamp(1, n_features);
                for (i, f) in pool.iter_mut().enumerate() {
                    *f = i;
                }
                for i in 0..k {
                    let j = rng.gen_range(i..n_features);
                    pool.swap(i, j);
                }
                candidates.extend_from_slice(&pool[..k]);
                // Ascending order keeps tie-breaking identical to the
                // all-features search when k covers every feature.
                candidates.sort_unstable();
            }
            _ => candidates.extend(0..n_features),
        }

        let mut best: Option<BestSplit> = None;
        for &f in &candidates {
            if let Some((t, ratio, left_n, right_n)) = best_split_for_feature(
                &columns.values[f],
                &columns.labels,
                &rows,
                params.min_leaf,
                &mut scratch,
            ) {
                // Strict > keeps the lowest feature index on ties.
                if best.as_ref().is_none_or(|b| ratio > b.ratio) {
                    best = Some(BestSplit {
                        ratio,
                        feature: f,
                        threshold: t,
                        to_left: left_n >= right_n,
                    });
                }
            }
        }

        let Some(split) = best else {
            make_leaf(&mut nodes);
            continue;
        };

        let column = &columns.values[split.feature];
        let mut left_rows = Vec::new();
        let mut right_rows = Vec::new();
        for r in rows {
            let v = column[r as usize];
            let go_left = if v == SENTINEL {
                split.to_left
            } else {
                v <= split.threshold
            };
            if go_left {
                left_rows.push(r);
            } else {
                right_rows.push(r);
            }
        }

        let left_slot = nodes.len() as u32;
        nodes.push(TreeNode::Leaf { good: 0, bad: 0 });
        let right_slot = nodes.len() as u32;
        nodes.push(TreeNode::Leaf { good: 0, bad: 0 });
        nodes[slot as usize] = TreeNode::Split {
            feature: split.feature as u32,
            threshold: split.threshold,
            missing: if split.to_left {
                MissingPolicy::ToLeft
            } else {
                MissingPolicy::ToRight
            },
            left: left_slot,
            right: right_slot,
        };
        // Right pushed first so the left child is grown next; with a
        // random stream attached this fixes the draw order.
        stack.push((right_rows, right_slot));
        stack.push((left_rows, left_slot));
    }
    nodes
}

/// Upper confidence bound on the true error rate of a leaf that made
/// `errors` mistakes out of `n`: the largest p with
/// P(X <= errors | n, p) >= confidence under a Binomial(n, p).
fn upper_error_bound(errors: u32, n: u32, confidence: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if errors >= n {
        return 1.0;
    }
    if errors == 0 {
        return 1.0 - confidence.powf(1.0 / n as f64);
    }
    // P(X <= e; n, p) = I_{1-p}(n-e, e+1), decreasing in p. Bisect.
    let a = (n - errors) as f64;
    let b = (errors + 1) as f64;
    let cdf = |p: f64| beta_reg(a, b, 1.0 - p);
    let mut lo = errors as f64 / n as f64;
    let mut hi = 1.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) >= confidence {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Bottom-up subtree replacement: a subtree collapses to a leaf when the
/// leaf's pessimistic error estimate does not exceed the sum of its
/// leaves' estimates.
fn prune_nodes(nodes: &mut [TreeNode], confidence: f64) {
    enum Visit {
        Pre(u32),
        Post(u32),
    }
    // Per node after its visit: (pessimistic errors, good, bad).
    let mut results: Vec<(f64, u32, u32)> = vec![(0.0, 0, 0); nodes.len()];
    let mut stack = vec![Visit::Pre(0)];
    while let Some(visit) = stack.pop() {
        match visit {
            Visit::Pre(i) => match nodes[i as usize] {
                TreeNode::Leaf { good, bad } => {
                    let n = good + bad;
                    let e = good.min(bad);
                    results[i as usize] =
                        (n as f64 * upper_error_bound(e, n, confidence), good, bad);
                }
                TreeNode::Split { left, right, .. } => {
                    stack.push(Visit::Post(i));
                    stack.push(Visit::Pre(right));
                    stack.push(Visit::Pre(left));
                }
            },
            Visit::Post(i) => {
                let TreeNode::Split { left, right, .. } = nodes[i as usize] else {
                    unreachable!("post visit on a leaf");
                };
                let (le, lg, lb) = results[left as usize];
                let (re, rg, rb) = results[right as usize];
                let (good, bad) = (lg + rg, lb + rb);
                let n = good + bad;
                let subtree_errors = le + re;
                let leaf_errors = n as f64 * upper_error_bound(good.min(bad), n, confidence);
                if leaf_errors <= subtree_errors {
                    nodes[i as usize] = TreeNode::Leaf { good, bad };
                    results[i as usize] = (leaf_errors, good, bad);
                } else {
                    results[i as usize] = (subtree_errors, good, bad);
                }
            }
        }
    }
}

/// Drops unreachable arena entries and renumbers nodes in preorder, so
/// equal trees serialize identically.
fn compact(nodes: Vec<TreeNode>) -> Vec<TreeNode> {
    let mut out: Vec<TreeNode> = vec![TreeNode::Leaf { good: 0, bad: 0 }];
    let mut stack: Vec<(u32, usize)> = vec![(0, 0)];
    while let Some((old, slot)) = stack.pop() {
        match nodes[old as usize] {
            TreeNode::Leaf { good, bad } => out[slot] = TreeNode::Leaf { good, bad },
            TreeNode::Split {
                feature,
                threshold,
                missing,
                left,
                right,
            } => {
                let l = out.len();
                out.push(TreeNode::Leaf { good: 0, bad: 0 });
                let r = out.len();
                out.push(TreeNode::Leaf { good: 0, bad: 0 });
                out[slot] = TreeNode::Split {
                    feature,
                    threshold,
                    missing,
                    left: l as u32,
                    right: r as u32,
                };
                stack.push((right, r));
                stack.push((left, l));
            }
        }
    }
    out
}

/// Trains the pruned gain-ratio tree on all features.
pub fn train_c45(dataset: &LabeledDataset, params: &C45Params) -> Result<TreeModel, TrainError> {
    if params.min_leaf < 1 {
        return Err(TrainError::InvalidParams(
            "min_leaf must be at least 1".to_string(),
        ));
    }
    if !(params.confidence > 0.0 && params.confidence <= 0.5) {
        return Err(TrainError::InvalidParams(format!(
            "confidence must be in (0, 0.5], got {}",
            params.confidence
        )));
    }
    if dataset.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let columns = Columns::from_dataset(dataset);
    let rows: Vec<u32> = (0..dataset.len() as u32).collect();
    let mut nodes = grow_tree(
        &columns,
        rows,
        &GrowParams {
            min_leaf: params.min_leaf,
            features_per_split: None,
        },
        None,
    );
    if params.prune {
        prune_nodes(&mut nodes, params.confidence);
    }
    Ok(TreeModel {
        nodes: compact(nodes),
        features: dataset.features().clone(),
        params: TreeParams {
            min_leaf: params.min_leaf,
            confidence: params.confidence,
            prune: params.prune,
            features_per_split: None,
        },
    })
}

/// Trains an unpruned tree that considers a random feature subset at
/// every node. Deterministic given the seed.
pub fn train_random_tree(
    dataset: &LabeledDataset,
    params: &RandomTreeParams,
    seed: u64,
) -> Result<TreeModel, TrainError> {
    if dataset.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let columns = Columns::from_dataset(dataset);
    let rows: Vec<u32> = (0..dataset.len() as u32).collect();
    let mut rng = seeds::stream(seed, "random-tree", 0);
    grow_random_tree(&columns, rows, dataset.features(), params, &mut rng)
}

/// Random-tree induction over prepared columns and row ids; the forest
/// trainer calls this once per bootstrap resample.
pub(crate) fn grow_random_tree(
    columns: &Columns,
    rows: Vec<u32>,
    features: &FeatureSet,
    params: &RandomTreeParams,
    rng: &mut ChaCha8Rng,
) -> Result<TreeModel, TrainError> {
    if params.min_leaf < 1 {
        return Err(TrainError::InvalidParams(
            "min_leaf must be at least 1".to_string(),
        ));
    }
    if let Some(k) = params.features_per_split {
        if k < 1 {
            return Err(TrainError::InvalidParams(
                "features_per_split must be at least 1".to_string(),
            ));
        }
    }
    let k = params
        .features_per_split
        .unwrap_or_else(|| default_features_per_split(columns.n_features()))
        .min(columns.n_features());
    let nodes = grow_tree(
        columns,
        rows,
        &GrowParams {
            min_leaf: params.min_leaf,
            features_per_split: Some(k),
        },
        Some(rng),
    );
    Ok(TreeModel {
        nodes: compact(nodes),
        features: features.clone(),
        params: TreeParams {
            min_leaf: params.min_leaf,
            confidence: 0.0,
            prune: false,
            features_per_split: Some(k),
        },
    })
}
