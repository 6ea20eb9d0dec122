//! Second-order gradient boosting with a softmax objective: one tree per
//! class per round, the standard gain/leaf formulas, no subsampling.

use serde::{Deserialize, Serialize};

use super::tree::{build_tree_accumulating, GradTreeParams, TreeNode};
use super::{present_classes, softmax_in_place, Classify, TabularError};
use crate::datamodel::{FeatureMatrix, SeverityLabel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbdtParams {
    pub rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub min_child_samples: usize,
}

impl Default for GbdtParams {
    fn default() -> Self {
        Self {
            rounds: 100,
            learning_rate: 0.1,
            max_depth: 4,
            lambda: 1.0,
            gamma: 0.0,
            min_child_samples: 2,
        }
    }
}

/// A fitted boosting ensemble: `trees[round][class]`, class scores
/// `base + learning_rate * sum of tree outputs`, probabilities by softmax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub params: GbdtParams,
    pub n_features: usize,
    /// Log class priors.
    pub base_score: Vec<f64>,
    pub trees: Vec<Vec<TreeNode>>,
    /// Cumulative split gain per encoded column.
    pub feature_gain: Vec<f64>,
    /// Mean training cross-entropy before any trees and after each round.
    pub train_loss: Vec<f64>,
}

const PRIOR_FLOOR: f64 = 1e-12;
const N_CLASSES: usize = SeverityLabel::COUNT;

/// Fit the boosting ensemble. Each round computes softmax probabilities,
/// per-class gradients `p - y` and hessians `p(1-p)`, grows one tree per
/// class, and updates the scores. The algorithm is free of randomness, so
/// training is bitwise reproducible.
pub fn fit_gbdt(
    x: &FeatureMatrix,
    labels: &[SeverityLabel],
    params: &GbdtParams,
) -> Result<GbdtModel, TabularError> {
    validate_training_input(x, labels)?;
    if !(params.learning_rate > 0.0 && params.learning_rate <= 1.0) {
        return Err(TabularError::Config(format!(
            "learning rate must lie in (0, 1], got {}",
            params.learning_rate
        )));
    }

    let n = x.n_rows();
    let mut base_score = vec![0.0; N_CLASSES];
    for label in labels {
        base_score[label.index()] += 1.0;
    }
    for score in &mut base_score {
        *score = (*score / n as f64).max(PRIOR_FLOOR).ln();
    }

    let tree_params = GradTreeParams {
        max_depth: params.max_depth,
        lambda: params.lambda,
        gamma: params.gamma,
        min_child_samples: params.min_child_samples,
    };

    let mut scores: Vec<Vec<f64>> = vec![base_score.clone(); n];
    let mut feature_gain = vec![0.0; x.n_cols()];
    let mut trees = Vec::with_capacity(params.rounds);
    let mut train_loss = Vec::with_capacity(params.rounds + 1);
    train_loss.push(mean_cross_entropy(&scores, labels));

    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    for _ in 0..params.rounds {
        let probs: Vec<Vec<f64>> = scores
            .iter()
            .map(|row| {
                let mut p = row.clone();
                softmax_in_place(&mut p);
                p
            })
            .collect();

        let mut round_trees = Vec::with_capacity(N_CLASSES);
        for class in 0..N_CLASSES {
            for i in 0..n {
                let p = probs[i][class];
                let y = if labels[i].index() == class { 1.0 } else { 0.0 };
                grad[i] = p - y;
                hess[i] = p * (1.0 - p);
            }
            let tree = build_tree_accumulating(x, &grad, &hess, &tree_params, &mut feature_gain)?;
            for i in 0..n {
                scores[i][class] += params.learning_rate * tree.evaluate(x.row(i))[0];
            }
            round_trees.push(tree);
        }
        trees.push(round_trees);
        train_loss.push(mean_cross_entropy(&scores, labels));
    }

    Ok(GbdtModel {
        params: *params,
        n_features: x.n_cols(),
        base_score,
        trees,
        feature_gain,
        train_loss,
    })
}

impl GbdtModel {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    fn raw_scores(&self, row: &[f64]) -> Vec<f64> {
        let mut scores = self.base_score.clone();
        for round in &self.trees {
            for (class, tree) in round.iter().enumerate() {
                scores[class] += self.params.learning_rate * tree.evaluate(row)[0];
            }
        }
        scores
    }
}

impl Classify for GbdtModel {
    fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<Vec<f64>>, TabularError> {
        check_schema(self.n_features, x)?;
        Ok((0..x.n_rows())
            .map(|i| {
                let mut scores = self.raw_scores(x.row(i));
                softmax_in_place(&mut scores);
                scores
            })
            .collect())
    }

    fn n_features(&self) -> usize {
        self.n_features
    }
}

pub(super) fn validate_training_input(
    x: &FeatureMatrix,
    labels: &[SeverityLabel],
) -> Result<(), TabularError> {
    if x.n_rows() == 0 {
        return Err(TabularError::Shape("training data is empty".into()));
    }
    if labels.len() != x.n_rows() {
        return Err(TabularError::Shape(format!(
            "{} labels for {} rows",
            labels.len(),
            x.n_rows()
        )));
    }
    if present_classes(labels).len() < 2 {
        return Err(TabularError::DegenerateLabels(
            "training data holds a single class".into(),
        ));
    }
    Ok(())
}

pub(super) fn check_schema(expected: usize, x: &FeatureMatrix) -> Result<(), TabularError> {
    if x.n_cols() != expected {
        return Err(TabularError::Shape(format!(
            "matrix has {} columns, model expects {expected}",
            x.n_cols()
        )));
    }
    Ok(())
}

fn mean_cross_entropy(scores: &[Vec<f64>], labels: &[SeverityLabel]) -> f64 {
    let mut total = 0.0;
    for (row, label) in scores.iter().zip(labels) {
        let mut p = row.clone();
        softmax_in_place(&mut p);
        total -= p[label.index()].max(PRIOR_FLOOR).ln();
    }
    total / labels.len() as f64
}
