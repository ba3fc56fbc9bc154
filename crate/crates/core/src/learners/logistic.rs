//! L2-regularized logistic regression on standardized inputs.
//!
//! Missing values are imputed with the per-feature training median, then
//! every column is centered and scaled. Weights (not the intercept) carry
//! a small ridge penalty. Fitting is Newton's method with step halving,
//! stopped when the gradient max-norm falls under the tolerance or the
//! iteration cap is reached.

use crate::features::{FeatureSet, FeatureVector};
use crate::labeling::{Label, LabeledDataset};
use crate::learners::TrainError;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticParams {
    /// L2 penalty on the weights (never the intercept).
    pub ridge: f64,
    /// Gradient max-norm stopping tolerance.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            ridge: 1e-8,
            tolerance: 1e-6,
            max_iterations: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    features: FeatureSet,
    /// Weights on the standardized scale, one per feature.
    weights: Vec<f64>,
    intercept: f64,
    centers: Vec<f64>,
    scales: Vec<f64>,
    /// Training-median fill-in per feature, on the raw scale.
    imputations: Vec<f64>,
    converged: bool,
    iterations: usize,
    params: LogisticParams,
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Median of an unordered, non-empty slice.
fn median(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Solves `A x = b` for symmetric positive-definite `A` (row-major,
/// dimension d) by in-place Cholesky. Returns `None` if A is not PD.
fn solve_spd(a: &mut [f64], b: &mut [f64], d: usize) -> Option<()> {
    // Factor A = L L^T, storing L in the lower triangle.
    for j in 0..d {
        let mut diag = a[j * d + j];
        for k in 0..j {
            diag -= a[j * d + k] * a[j * d + k];
        }
        if diag <= 0.0 || !diag.is_finite() {
            return None;
        }
        let root = diag.sqrt();
        a[j * d + j] = root;
        for i in j + 1..d {
            let mut v = a[i * d + j];
            for k in 0..j {
                v -= a[i * d + k] * a[j * d + k];
            }
            a[i * d + j] = v / root;
        }
    }
    // Forward solve L y = b.
    for i in 0..d {
        let mut v = b[i];
        for k in 0..i {
            v -= a[i * d + k] * b[k];
        }
        b[i] = v / a[i * d + i];
    }
    // Back solve L^T x = y.
    for i in (0..d).rev() {
        let mut v = b[i];
        for k in i + 1..d {
            v -= a[k * d + i] * b[k];
        }
        b[i] = v / a[i * d + i];
    }
    Some(())
}

/// Fits the model. Errors when the dataset is empty or single-class.
pub fn train_logistic(
    dataset: &LabeledDataset,
    params: &LogisticParams,
) -> Result<LogisticModel, TrainError> {
    if params.ridge < 0.0 || !params.ridge.is_finite() {
        return Err(TrainError::InvalidParams(
            "ridge must be non-negative".to_string(),
        ));
    }
    if params.tolerance.is_nan() || params.tolerance <= 0.0 {
        return Err(TrainError::InvalidParams(
            "tolerance must be positive".to_string(),
        ));
    }
    if params.max_iterations < 1 {
        return Err(TrainError::InvalidParams(
            "max_iterations must be at least 1".to_string(),
        ));
    }
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

    let n = dataset.len();
    let n_features = dataset.features().len();

    // Imputation values: per-feature median of present values (0 when a
    // feature is never present).
    let mut imputations = Vec::with_capacity(n_features);
    let mut present = Vec::new();
    for f in 0..n_features {
        present.clear();
        present.extend(dataset.examples().iter().filter_map(|ex| ex.vector.get(f)));
        imputations.push(if present.is_empty() {
            0.0
        } else {
            median(&mut present)
        });
    }

    // Imputed design matrix, then standardization statistics from it.
    let mut x = vec![0.0f64; n * n_features];
    for (i, ex) in dataset.examples().iter().enumerate() {
        for f in 0..n_features {
            x[i * n_features + f] = ex.vector.get(f).unwrap_or(imputations[f]);
        }
    }
    let mut centers = vec![0.0f64; n_features];
    let mut scales = vec![0.0f64; n_features];
    for f in 0..n_features {
        let mean = (0..n).map(|i| x[i * n_features + f]).sum::<f64>() / n as f64;
        let var = (0..n)
            .map(|i| {
                let d = x[i * n_features + f] - mean;
                d * d
            })
            .sum::<f64>()
            / n as f64;
        centers[f] = mean;
        scales[f] = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
    }
    for i in 0..n {
        for f in 0..n_features {
            x[i * n_features + f] = (x[i * n_features + f] - centers[f]) / scales[f];
        }
    }
    let y: Vec<f64> = dataset
        .examples()
        .iter()
        .map(|ex| if ex.label == Label::Good { 1.0 } else { 0.0 })
        .collect();

    // Newton iterations on (weights, intercept).
    let d = n_features + 1; // intercept is the last coordinate
    let mut w = vec![0.0f64; d];
    let penalized_ll = |w: &[f64]| -> f64 {
        let mut ll = 0.0;
        for i in 0..n {
            let mut z = w[n_features];
            for f in 0..n_features {
                z += w[f] * x[i * n_features + f];
            }
            // y ln p + (1-y) ln(1-p), written stably via log1p.
            ll += y[i] * z - z.max(0.0) - (-z.abs()).exp().ln_1p();
        }
        let sq: f64 = w[..n_features].iter().map(|v| v * v).sum();
        ll - 0.5 * params.ridge * sq
    };

    let mut grad = vec![0.0f64; d];
    let mut hess = vec![0.0f64; d * d];
    let mut converged = false;
    let mut iterations = 0;
    for iter in 1..=params.max_iterations {
        iterations = iter;
        grad.iter_mut().for_each(|g| *g = 0.0);
        hess.iter_mut().for_each(|h| *h = 0.0);
        for i in 0..n {
            let mut z = w[n_features];
            for f in 0..n_features {
                z += w[f] * x[i * n_features + f];
            }
            let p = sigmoid(z);
            let r = y[i] - p;
            let wt = (p * (1.0 - p)).max(1e-12);
            let row = &x[i * n_features..(i + 1) * n_features];
            for f in 0..n_features {
                grad[f] += r * row[f];
            }
            grad[n_features] += r;
            for a in 0..n_features {
                for b in a..n_features {
                    hess[a * d + b] += wt * row[a] * row[b];
                }
                hess[a * d + n_features] += wt * row[a];
            }
            hess[n_features * d + n_features] += wt;
        }
        for f in 0..n_features {
            grad[f] -= params.ridge * w[f];
            hess[f * d + f] += params.ridge;
        }
        // Tiny jitter keeps the factorization PD near separation without
        // moving the stationary point (it enters only the step matrix).
        hess[n_features * d + n_features] += 1e-12;
        // Mirror the upper triangle.
        for a in 0..d {
            for b in 0..a {
                hess[a * d + b] = hess[b * d + a];
            }
        }

        let gnorm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gnorm < params.tolerance {
            converged = true;
            iterations = iter - 1;
            break;
        }

        let mut step = grad.clone();
        if solve_spd(&mut hess, &mut step, d).is_none() {
            // Fall back to a plain gradient step if the (jittered)
            // Hessian still fails to factor.
            step.copy_from_slice(&grad);
        }
        let before = penalized_ll(&w);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = w.iter().zip(&step).map(|(wi, s)| wi + alpha * s).collect();
            if penalized_ll(&trial) >= before - 1e-12 {
                w = trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // No ascent step exists at any scale: numerically stationary.
            converged = gnorm < params.tolerance;
            break;
        }
    }

    Ok(LogisticModel {
        features: dataset.features().clone(),
        weights: w[..n_features].to_vec(),
        intercept: w[n_features],
        centers,
        scales,
        imputations,
        converged,
        iterations,
        params: params.clone(),
    })
}

impl LogisticModel {
    pub fn features(&self) -> &FeatureSet {
        &self.features
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn imputations(&self) -> &[f64] {
        &self.imputations
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn params(&self) -> &LogisticParams {
        &self.params
    }

    /// Probability assigned to `Good`.
    ///
    /// Panics if the vector is not aligned to the model's feature set.
    pub fn score(&self, vector: &FeatureVector) -> f64 {
        assert_eq!(
            vector.len(),
            self.features.len(),
            "vector not aligned to the model's feature set"
        );
        let mut z = self.intercept;
        for f in 0..self.features.len() {
            let raw = vector.get(f).unwrap_or(self.imputations[f]);
            z += self.weights[f] * (raw - self.centers[f]) / self.scales[f];
        }
        sigmoid(z)
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        features: FeatureSet,
        weights: Vec<f64>,
        intercept: f64,
        centers: Vec<f64>,
        scales: Vec<f64>,
        imputations: Vec<f64>,
        converged: bool,
        iterations: usize,
        params: LogisticParams,
    ) -> Result<LogisticModel, String> {
        let f = features.len();
        for (name, v) in [
            ("weights", &weights),
            ("centers", &centers),
            ("scales", &scales),
            ("imputations", &imputations),
        ] {
            if v.len() != f {
                return Err(format!("{name} misaligned with the feature set"));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(format!("{name} contains a non-finite value"));
            }
        }
        if scales.iter().any(|s| *s <= 0.0) {
            return Err("scales must be positive".to_string());
        }
        if !intercept.is_finite() {
            return Err("intercept is not finite".to_string());
        }
        Ok(LogisticModel {
            features,
            weights,
            intercept,
            centers,
            scales,
            imputations,
            converged,
            iterations,
            params,
        })
    }
}
