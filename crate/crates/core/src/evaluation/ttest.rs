//! Two-tailed paired t-test over matched per-fold scores.

use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TTestError {
    #[error("score vectors differ in length ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },
    #[error("need at least 2 paired scores (got {n})")]
    TooFewPairs { n: usize },
    #[error("alpha must lie strictly between 0 and 1 (got {0})")]
    InvalidAlpha(f64),
    #[error("test/train ratio must be finite and non-negative (got {0})")]
    InvalidRatio(f64),
    #[error("score at position {0} is not finite")]
    NonFiniteScore(usize),
}

/// Which variance estimate scales the paired statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TTestVariant {
    /// Classic paired t-test: t = mean(d) / (sd(d)/√n).
    Standard,
    /// Variance-corrected variant for scores from resampled overlapping
    /// training sets: the denominator uses (1/n + test/train) · var(d).
    CorrectedResampled { test_train_ratio: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub t: f64,
    /// Two-tailed p-value in [0, 1].
    pub p: f64,
    /// True exactly when `p < alpha`.
    pub significant: bool,
    pub alpha: f64,
}

/// Classic two-tailed paired t-test on matched score vectors.
///
/// Both vectors must come from the same fold assignment for the
/// pairing to be meaningful; that is the caller's contract.
///
/// Zero-variance differences use the documented conventions: a nonzero
/// mean is treated as infinitely significant (p = 0) and an all-zero
/// difference as no evidence at all (t = 0, p = 1).
pub fn paired_t_test(a: &[f64], b: &[f64], alpha: f64) -> Result<TestResult, TTestError> {
    paired_t_test_with(a, b, alpha, TTestVariant::Standard)
}

/// Paired t-test with an explicit variance variant.
pub fn paired_t_test_with(
    a: &[f64],
    b: &[f64],
    alpha: f64,
    variant: TTestVariant,
) -> Result<TestResult, TTestError> {
    if a.len() != b.len() {
        return Err(TTestError::LengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    let n = a.len();
    if n < 2 {
        return Err(TTestError::TooFewPairs { n });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(TTestError::InvalidAlpha(alpha));
    }
    for (i, v) in a.iter().chain(b.iter()).enumerate() {
        if !v.is_finite() {
            return Err(TTestError::NonFiniteScore(i % n));
        }
    }
    if let TTestVariant::CorrectedResampled { test_train_ratio } = variant {
        if !(test_train_ratio.is_finite() && test_train_ratio >= 0.0) {
            return Err(TTestError::InvalidRatio(test_train_ratio));
        }
    }

    let nf = n as f64;
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / nf;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (nf - 1.0);

    let (t, p) = if var == 0.0 {
        if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (mean.signum() * f64::INFINITY, 0.0)
        }
    } else {
        let denom = match variant {
            TTestVariant::Standard => (var / nf).sqrt(),
            TTestVariant::CorrectedResampled { test_train_ratio } => {
                ((1.0 / nf + test_train_ratio) * var).sqrt()
            }
        };
        let t = mean / denom;
        let dist = StudentsT::new(0.0, 1.0, nf - 1.0)
            .expect("n >= 2 gives a valid degrees-of-freedom value");
        let p = (2.0 * dist.cdf(-t.abs())).clamp(0.0, 1.0);
        (t, p)
    };

    Ok(TestResult {
        t,
        p,
        significant: p < alpha,
        alpha,
    })
}
