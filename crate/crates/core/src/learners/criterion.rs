//! Split-quality arithmetic: entropy, information gain, gain ratio.
//!
//! All quantities are in bits (base-2 logarithms) over the binary
//! Good/Bad class distribution. Splits are binary partitions of the form
//! value ≤ threshold versus value > threshold.

use crate::labeling::Label;

/// Shannon entropy of a two-class count pair, in bits. Empty input has
/// zero entropy.
pub fn entropy(good: usize, bad: usize) -> f64 {
    let n = (good + bad) as f64;
    if good == 0 || bad == 0 {
        return 0.0;
    }
    let mut h = 0.0;
    for c in [good, bad] {
        let p = c as f64 / n;
        h -= p * p.log2();
    }
    h
}

/// Class counts on each side of `value <= threshold`:
/// (left_good, left_bad, right_good, right_bad).
fn partition_counts(rows: &[(f64, Label)], threshold: f64) -> (usize, usize, usize, usize) {
    let mut c = (0usize, 0usize, 0usize, 0usize);
    for (value, label) in rows {
        match (*value <= threshold, label) {
            (true, Label::Good) => c.0 += 1,
            (true, Label::Bad) => c.1 += 1,
            (false, Label::Good) => c.2 += 1,
            (false, Label::Bad) => c.3 += 1,
        }
    }
    c
}

/// Information gain and gain ratio from the partition's class counts.
/// Gain ratio is 0 when the split information is 0 (one side empty).
pub fn gain_and_ratio_from_counts(
    left_good: usize,
    left_bad: usize,
    right_good: usize,
    right_bad: usize,
) -> (f64, f64) {
    let left = (left_good + left_bad) as f64;
    let right = (right_good + right_bad) as f64;
    let n = left + right;
    if n == 0.0 {
        return (0.0, 0.0);
    }
    let gain = entropy(left_good + right_good, left_bad + right_bad)
        - (left / n) * entropy(left_good, left_bad)
        - (right / n) * entropy(right_good, right_bad);
    if left == 0.0 || right == 0.0 {
        return (gain, 0.0);
    }
    let split_info = -(left / n) * (left / n).log2() - (right / n) * (right / n).log2();
    if split_info == 0.0 {
        return (gain, 0.0);
    }
    (gain, gain / split_info)
}

/// Information gain of partitioning `rows` at `threshold`.
pub fn information_gain(rows: &[(f64, Label)], threshold: f64) -> f64 {
    let (lg, lb, rg, rb) = partition_counts(rows, threshold);
    gain_and_ratio_from_counts(lg, lb, rg, rb).0
}

/// Split information (entropy of the partition sizes themselves).
pub fn split_information(rows: &[(f64, Label)], threshold: f64) -> f64 {
    let (lg, lb, rg, rb) = partition_counts(rows, threshold);
    entropy(lg + lb, rg + rb)
}

/// Information gain divided by split information; 0 when the split
/// information is 0.
pub fn gain_ratio(rows: &[(f64, Label)], threshold: f64) -> f64 {
    let (lg, lb, rg, rb) = partition_counts(rows, threshold);
    gain_and_ratio_from_counts(lg, lb, rg, rb).1
}
