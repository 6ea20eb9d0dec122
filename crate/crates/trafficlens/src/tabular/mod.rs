//! Accident-severity classification.
//!
//! One CART learner powers everything here: second-order gradient boosting
//! ([`fit_gbdt`]), a Gini random forest ([`fit_random_forest`]) and, as the
//! linear baseline, softmax regression ([`fit_logistic`]). Class balancing,
//! gain-based feature importance, deterministic grid search and prediction
//! ensembling round out the pipeline.

mod balance;
mod forest;
mod gbdt;
mod importance;
mod logistic;
mod search;
mod tree;

pub use balance::{balance_classes, BalanceStrategy};
pub use forest::{fit_random_forest, RfModel, RfParams};
pub use gbdt::{fit_gbdt, GbdtModel, GbdtParams};
pub use importance::{feature_importance, ImportanceEntry, ImportanceReport};
pub use logistic::{fit_logistic, logistic_loss_and_grad, LogisticModel, LogisticParams};
pub use search::{grid_search, CellScore, SearchOutcome};
pub use tree::{build_tree, GradTreeParams, TreeNode};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datamodel::{FeatureMatrix, SeverityLabel};

#[derive(Debug, Error)]
pub enum TabularError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("value error: {0}")]
    Value(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),
}

/// Common prediction surface for the three severity classifiers.
pub trait Classify {
    /// Per-sample class-probability vectors; every row sums to 1.
    fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<Vec<f64>>, TabularError>;

    /// Expected encoded feature count.
    fn n_features(&self) -> usize;

    /// Argmax labels, lowest class index on exact ties.
    fn predict(&self, x: &FeatureMatrix) -> Result<Vec<SeverityLabel>, TabularError> {
        Ok(self
            .predict_proba(x)?
            .iter()
            .map(|row| SeverityLabel::from_index(argmax(row)).expect("three classes"))
            .collect())
    }
}

/// Any fitted severity classifier, as stored in model artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SeverityModel {
    Gbdt(GbdtModel),
    Rf(RfModel),
    Logistic(LogisticModel),
}

impl SeverityModel {
    pub fn kind(&self) -> &'static str {
        match self {
            SeverityModel::Gbdt(_) => "gbdt",
            SeverityModel::Rf(_) => "rf",
            SeverityModel::Logistic(_) => "logistic",
        }
    }

    /// Cumulative per-column split gain, for the tree-based models.
    pub fn feature_gain(&self) -> Option<&[f64]> {
        match self {
            SeverityModel::Gbdt(m) => Some(&m.feature_gain),
            SeverityModel::Rf(m) => Some(&m.feature_gain),
            SeverityModel::Logistic(_) => None,
        }
    }
}

impl Classify for SeverityModel {
    fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<Vec<f64>>, TabularError> {
        match self {
            SeverityModel::Gbdt(m) => m.predict_proba(x),
            SeverityModel::Rf(m) => m.predict_proba(x),
            SeverityModel::Logistic(m) => m.predict_proba(x),
        }
    }

    fn n_features(&self) -> usize {
        match self {
            SeverityModel::Gbdt(m) => m.n_features(),
            SeverityModel::Rf(m) => m.n_features(),
            SeverityModel::Logistic(m) => m.n_features(),
        }
    }
}

/// Weighted arithmetic mean of the models' probability vectors.
/// Weights must be non-negative and sum to 1.
pub fn ensemble_predict(
    models: &[SeverityModel],
    x: &FeatureMatrix,
    weights: &[f64],
) -> Result<Vec<Vec<f64>>, TabularError> {
    if models.is_empty() || models.len() != weights.len() {
        return Err(TabularError::Config(format!(
            "{} models with {} weights",
            models.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| *w < 0.0) {
        return Err(TabularError::Config("weights must be non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(TabularError::Config(format!("weights sum to {total}, expected 1")));
    }
    if models.iter().any(|m| m.n_features() != models[0].n_features()) {
        return Err(TabularError::Schema(
            "ensemble members were trained on different schemas".into(),
        ));
    }

    let mut combined = vec![vec![0.0; SeverityLabel::COUNT]; x.n_rows()];
    for (model, &weight) in models.iter().zip(weights) {
        let probs = model.predict_proba(x)?;
        for (acc, row) in combined.iter_mut().zip(&probs) {
            for (a, p) in acc.iter_mut().zip(row) {
                *a += weight * p;
            }
        }
    }
    Ok(combined)
}

pub(crate) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in row.iter().enumerate().skip(1) {
        if *v > row[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn softmax_in_place(scores: &mut [f64]) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for s in scores.iter_mut() {
        *s = (*s - max).exp();
        total += *s;
    }
    for s in scores.iter_mut() {
        *s /= total;
    }
}

pub(crate) fn accuracy(predicted: &[SeverityLabel], actual: &[SeverityLabel]) -> f64 {
    let hits = predicted.iter().zip(actual).filter(|(a, b)| a == b).count();
    hits as f64 / actual.len() as f64
}

/// Distinct classes present, as indices.
pub(crate) fn present_classes(labels: &[SeverityLabel]) -> Vec<usize> {
    let mut seen = [false; SeverityLabel::COUNT];
    for label in labels {
        seen[label.index()] = true;
    }
    (0..SeverityLabel::COUNT).filter(|&k| seen[k]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::FeatureMatrix;
    use crate::datasynth::gen_blobs;

    #[test]
    fn ensemble_of_one_is_identity() {
        let (x, y) = gen_blobs(60, 4.0, 11);
        let model = SeverityModel::Gbdt(
            fit_gbdt(&x, &y, &GbdtParams { rounds: 5, ..GbdtParams::default() }).unwrap(),
        );
        let direct = model.predict_proba(&x).unwrap();
        let combined = ensemble_predict(std::slice::from_ref(&model), &x, &[1.0]).unwrap();
        assert_eq!(direct, combined);
    }

    #[test]
    fn ensemble_averages_probabilities() {
        // Two constant predictors built as zero-round boosters with skewed
        // priors: one almost surely Low, one almost surely Medium.
        let rows = vec![vec![0.0], vec![1.0]];
        let x = FeatureMatrix::from_raw(rows).unwrap();
        let low_heavy: Vec<_> = (0..99)
            .map(|_| SeverityLabel::Low)
            .chain(std::iter::once(SeverityLabel::Medium))
            .collect();
        let med_heavy: Vec<_> = (0..99)
            .map(|_| SeverityLabel::Medium)
            .chain(std::iter::once(SeverityLabel::Low))
            .collect();
        let train = FeatureMatrix::from_raw(vec![vec![0.5]; 100]).unwrap();
        let zero_rounds = GbdtParams { rounds: 0, ..GbdtParams::default() };
        let a = SeverityModel::Gbdt(fit_gbdt(&train, &low_heavy, &zero_rounds).unwrap());
        let b = SeverityModel::Gbdt(fit_gbdt(&train, &med_heavy, &zero_rounds).unwrap());

        let pa = a.predict_proba(&x).unwrap();
        let pb = b.predict_proba(&x).unwrap();
        let mix = ensemble_predict(&[a, b], &x, &[0.5, 0.5]).unwrap();
        for i in 0..2 {
            for k in 0..3 {
                let want = 0.5 * pa[i][k] + 0.5 * pb[i][k];
                assert!((mix[i][k] - want).abs() < 1e-12);
            }
            let sum: f64 = mix[i].iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ensemble_rejects_bad_weights() {
        let (x, y) = gen_blobs(30, 4.0, 1);
        let m = SeverityModel::Logistic(fit_logistic(&x, &y, &LogisticParams::default()).unwrap());
        assert!(matches!(
            ensemble_predict(std::slice::from_ref(&m), &x, &[0.5]),
            Err(TabularError::Config(_))
        ));
        assert!(matches!(
            ensemble_predict(std::slice::from_ref(&m), &x, &[-1.0, 2.0]),
            Err(TabularError::Config(_))
        ));
    }

    #[test]
    fn ensemble_tracks_the_best_individual_on_blobs() {
        let (x, y) = gen_blobs(300, 10.0, 42);
        let gbdt = SeverityModel::Gbdt(
            fit_gbdt(&x, &y, &GbdtParams { rounds: 30, ..GbdtParams::default() }).unwrap(),
        );
        let rf = SeverityModel::Rf(fit_random_forest(&x, &y, &RfParams::default(), 7).unwrap());
        let lr = SeverityModel::Logistic(fit_logistic(&x, &y, &LogisticParams::default()).unwrap());

        let best_single = [&gbdt, &rf, &lr]
            .iter()
            .map(|m| accuracy(&m.predict(&x).unwrap(), &y))
            .fold(f64::NEG_INFINITY, f64::max);

        let mix =
            ensemble_predict(&[gbdt, rf, lr], &x, &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]).unwrap();
        let labels: Vec<_> =
            mix.iter().map(|row| SeverityLabel::from_index(argmax(row)).unwrap()).collect();
        let ensemble_acc = accuracy(&labels, &y);
        assert!(
            ensemble_acc >= best_single - 0.02,
            "ensemble {ensemble_acc} fell more than 0.02 below best single {best_single}"
        );
    }
}
