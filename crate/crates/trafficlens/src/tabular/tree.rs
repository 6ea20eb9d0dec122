//! The shared CART learner.
//!
//! Two split criteria drive the same node machinery: the second-order
//! gradient gain used by boosting and the Gini impurity decrease used by
//! the random forest. Splits send `feature < threshold` left and the rest
//! right; thresholds are midpoints between adjacent distinct values, the
//! scan is exact (no histograms), and ties break toward the lowest feature
//! index, then the lowest threshold, so training is deterministic.

use serde::{Deserialize, Serialize};

use super::TabularError;
use crate::datamodel::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Internal {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        /// Boosted trees carry a single regression value; forest trees
        /// carry one class-frequency entry per class.
        values: Vec<f64>,
    },
}

impl TreeNode {
    pub fn evaluate<'a>(&'a self, row: &[f64]) -> &'a [f64] {
        match self {
            TreeNode::Leaf { values } => values,
            TreeNode::Internal { feature, threshold, left, right } => {
                if row[*feature] < *threshold {
                    left.evaluate(row)
                } else {
                    right.evaluate(row)
                }
            }
        }
    }

    pub fn n_splits(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.n_splits() + right.n_splits(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradTreeParams {
    pub max_depth: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub min_child_samples: usize,
}

impl Default for GradTreeParams {
    fn default() -> Self {
        Self { max_depth: 4, lambda: 1.0, gamma: 0.0, min_child_samples: 2 }
    }
}

/// Greedy recursive tree on per-sample gradients and hessians for one
/// class. Gain for a candidate split is
/// `0.5 * (GL^2/(HL+lambda) + GR^2/(HR+lambda) - G^2/(H+lambda)) - gamma`
/// and a split is accepted only when the gain is strictly positive and both
/// children keep at least `min_child_samples` rows. Leaves output
/// `-G/(H+lambda)`.
pub fn build_tree(
    x: &FeatureMatrix,
    grad: &[f64],
    hess: &[f64],
    params: &GradTreeParams,
) -> Result<TreeNode, TabularError> {
    let mut scratch = vec![0.0; x.n_cols()];
    build_tree_accumulating(x, grad, hess, params, &mut scratch)
}

/// As [`build_tree`], but adds each accepted split's gain to
/// `gain_by_column` for importance reporting.
pub(super) fn build_tree_accumulating(
    x: &FeatureMatrix,
    grad: &[f64],
    hess: &[f64],
    params: &GradTreeParams,
    gain_by_column: &mut [f64],
) -> Result<TreeNode, TabularError> {
    if x.n_rows() == 0 {
        return Err(TabularError::Shape("cannot build a tree on zero rows".into()));
    }
    if grad.len() != x.n_rows() || hess.len() != x.n_rows() {
        return Err(TabularError::Shape(format!(
            "{} gradients / {} hessians for {} rows",
            grad.len(),
            hess.len(),
            x.n_rows()
        )));
    }
    if grad.iter().any(|g| !g.is_finite()) || hess.iter().any(|h| !h.is_finite() || *h < 0.0) {
        return Err(TabularError::Value(
            "gradients must be finite and hessians finite and non-negative".into(),
        ));
    }
    let indices: Vec<usize> = (0..x.n_rows()).collect();
    Ok(grad_node(x, grad, hess, &indices, params, 0, gain_by_column))
}

fn grad_leaf(g: f64, h: f64, lambda: f64) -> TreeNode {
    let denom = h + lambda;
    let value = if denom > 0.0 { -g / denom } else { 0.0 };
    TreeNode::Leaf { values: vec![value] }
}

fn gain_term(g: f64, h: f64, lambda: f64) -> f64 {
    let denom = h + lambda;
    if denom > 0.0 {
        g * g / denom
    } else {
        0.0
    }
}

fn grad_node(
    x: &FeatureMatrix,
    grad: &[f64],
    hess: &[f64],
    indices: &[usize],
    params: &GradTreeParams,
    depth: usize,
    gain_by_column: &mut [f64],
) -> TreeNode {
    let g_total: f64 = indices.iter().map(|&i| grad[i]).sum();
    let h_total: f64 = indices.iter().map(|&i| hess[i]).sum();
    if depth >= params.max_depth || indices.len() < 2 * params.min_child_samples.max(1) {
        return grad_leaf(g_total, h_total, params.lambda);
    }

    let parent_term = gain_term(g_total, h_total, params.lambda);
    let mut best: Option<(f64, usize, f64)> = None;
    let mut sorted: Vec<(f64, f64, f64)> = Vec::with_capacity(indices.len());
    for feature in 0..x.n_cols() {
        sorted.clear();
        sorted.extend(indices.iter().map(|&i| (x.get(i, feature), grad[i], hess[i])));
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

        let mut g_left = 0.0;
        let mut h_left = 0.0;
        for cut in 0..sorted.len() - 1 {
            g_left += sorted[cut].1;
            h_left += sorted[cut].2;
            if sorted[cut].0 == sorted[cut + 1].0 {
                continue;
            }
            let n_left = cut + 1;
            let n_right = sorted.len() - n_left;
            if n_left < params.min_child_samples || n_right < params.min_child_samples {
                continue;
            }
            let gain = 0.5
                * (gain_term(g_left, h_left, params.lambda)
                    + gain_term(g_total - g_left, h_total - h_left, params.lambda)
                    - parent_term)
                - params.gamma;
            if best.is_none_or(|(current, _, _)| gain > current) {
                let threshold = (sorted[cut].0 + sorted[cut + 1].0) / 2.0;
                best = Some((gain, feature, threshold));
            }
        }
    }

    match best {
        Some((gain, feature, threshold)) if gain > 0.0 => {
            gain_by_column[feature] += gain;
            let (left_idx, right_idx) = partition(x, indices, feature, threshold);
            let left =
                grad_node(x, grad, hess, &left_idx, params, depth + 1, gain_by_column);
            let right =
                grad_node(x, grad, hess, &right_idx, params, depth + 1, gain_by_column);
            TreeNode::Internal { feature, threshold, left: Box::new(left), right: Box::new(right) }
        }
        _ => grad_leaf(g_total, h_total, params.lambda),
    }
}

#[derive(Debug, Clone, Copy)]
pub(super) struct GiniTreeParams {
    pub max_depth: usize,
    pub min_child_samples: usize,
}

/// Gini CART tree over integer class labels. `feature_pool` supplies the
/// candidate feature set for each node (the forest draws a random subset,
/// a plain CART passes all features). Leaves hold class frequencies.
pub(super) fn build_gini_tree(
    x: &FeatureMatrix,
    labels: &[usize],
    n_classes: usize,
    params: &GiniTreeParams,
    feature_pool: &mut dyn FnMut() -> Vec<usize>,
    gain_by_column: &mut [f64],
    indices: &[usize],
) -> TreeNode {
    gini_node(x, labels, n_classes, indices, params, 0, feature_pool, gain_by_column)
}

fn class_counts(labels: &[usize], indices: &[usize], n_classes: usize) -> Vec<f64> {
    let mut counts = vec![0.0; n_classes];
    for &i in indices {
        counts[labels[i]] += 1.0;
    }
    counts
}

/// n * gini(counts): the impurity "mass" so parent/child decreases add up.
fn gini_mass(counts: &[f64]) -> f64 {
    let n: f64 = counts.iter().sum();
    if n == 0.0 {
        return 0.0;
    }
    n - counts.iter().map(|c| c * c).sum::<f64>() / n
}

#[allow(clippy::too_many_arguments)]
fn gini_node(
    x: &FeatureMatrix,
    labels: &[usize],
    n_classes: usize,
    indices: &[usize],
    params: &GiniTreeParams,
    depth: usize,
    feature_pool: &mut dyn FnMut() -> Vec<usize>,
    gain_by_column: &mut [f64],
) -> TreeNode {
    let counts = class_counts(labels, indices, n_classes);
    let total = indices.len() as f64;
    let freq_leaf = || TreeNode::Leaf { values: counts.iter().map(|c| c / total).collect() };

    let parent_mass = gini_mass(&counts);
    if depth >= params.max_depth
        || indices.len() < 2 * params.min_child_samples.max(1)
        || parent_mass == 0.0
    {
        return freq_leaf();
    }

    let mut candidates = feature_pool();
    candidates.sort_unstable();
    let mut best: Option<(f64, usize, f64)> = None;
    let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(indices.len());
    for &feature in &candidates {
        sorted.clear();
        sorted.extend(indices.iter().map(|&i| (x.get(i, feature), labels[i])));
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

        let mut left_counts = vec![0.0; n_classes];
        for cut in 0..sorted.len() - 1 {
            left_counts[sorted[cut].1] += 1.0;
            if sorted[cut].0 == sorted[cut + 1].0 {
                continue;
            }
            let n_left = cut + 1;
            let n_right = sorted.len() - n_left;
            if n_left < params.min_child_samples || n_right < params.min_child_samples {
                continue;
            }
            let right_counts: Vec<f64> =
                counts.iter().zip(&left_counts).map(|(c, l)| c - l).collect();
            let decrease = parent_mass - gini_mass(&left_counts) - gini_mass(&right_counts);
            if best.is_none_or(|(current, _, _)| decrease > current) {
                let threshold = (sorted[cut].0 + sorted[cut + 1].0) / 2.0;
                best = Some((decrease, feature, threshold));
            }
        }
    }

    match best {
        Some((decrease, feature, threshold)) if decrease > 0.0 => {
            gain_by_column[feature] += decrease;
            let (left_idx, right_idx) = partition(x, indices, feature, threshold);
            let left = gini_node(
                x, labels, n_classes, &left_idx, params, depth + 1, feature_pool, gain_by_column,
            );
            let right = gini_node(
                x, labels, n_classes, &right_idx, params, depth + 1, feature_pool, gain_by_column,
            );
            TreeNode::Internal { feature, threshold, left: Box::new(left), right: Box::new(right) }
        }
        _ => freq_leaf(),
    }
}

fn partition(
    x: &FeatureMatrix,
    indices: &[usize],
    feature: usize,
    threshold: f64,
) -> (Vec<usize>, Vec<usize>) {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for &i in indices {
        if x.get(i, feature) < threshold {
            left.push(i);
        } else {
            right.push(i);
        }
    }
    (left, right)
}
