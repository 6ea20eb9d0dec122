//! Softmax regression baseline: full-batch gradient descent on
//! cross-entropy with an L2 penalty.

use serde::{Deserialize, Serialize};

use super::gbdt::{check_schema, validate_training_input};
use super::{softmax_in_place, Classify, TabularError};
use crate::datamodel::{FeatureMatrix, SeverityLabel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub steps: usize,
    pub step_size: f64,
    pub l2: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self { steps: 500, step_size: 0.2, l2: 1e-4 }
    }
}

/// Weights are a K x (D+1) matrix stored row-major, the trailing column
/// being the bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub params: LogisticParams,
    pub n_features: usize,
    pub weights: Vec<f64>,
}

const N_CLASSES: usize = SeverityLabel::COUNT;

/// Mean softmax cross-entropy plus `(l2/2)*||W||^2`, with its analytic
/// gradient. `weights` is the flat K x (D+1) matrix. Public so the
/// finite-difference gradient check can probe the exact training objective.
pub fn logistic_loss_and_grad(
    weights: &[f64],
    x: &FeatureMatrix,
    labels: &[SeverityLabel],
    l2: f64,
) -> (f64, Vec<f64>) {
    let d1 = x.n_cols() + 1;
    debug_assert_eq!(weights.len(), N_CLASSES * d1);
    let n = x.n_rows() as f64;

    let mut loss = 0.0;
    let mut grad = vec![0.0; weights.len()];
    for i in 0..x.n_rows() {
        let row = x.row(i);
        let mut scores = [0.0; N_CLASSES];
        for (k, score) in scores.iter_mut().enumerate() {
            let w = &weights[k * d1..(k + 1) * d1];
            *score = w[x.n_cols()] + row.iter().zip(w).map(|(v, c)| v * c).sum::<f64>();
        }
        softmax_in_place(&mut scores);
        loss -= scores[labels[i].index()].max(1e-300).ln();
        for k in 0..N_CLASSES {
            let y = if labels[i].index() == k { 1.0 } else { 0.0 };
            let delta = (scores[k] - y) / n;
            let g = &mut grad[k * d1..(k + 1) * d1];
            for (j, v) in row.iter().enumerate() {
                g[j] += delta * v;
            }
            g[x.n_cols()] += delta;
        }
    }
    loss /= n;

    for (g, w) in grad.iter_mut().zip(weights) {
        *g += l2 * w;
    }
    loss += 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>();
    (loss, grad)
}

/// Deterministic full-batch gradient descent from zero weights.
pub fn fit_logistic(
    x: &FeatureMatrix,
    labels: &[SeverityLabel],
    params: &LogisticParams,
) -> Result<LogisticModel, TabularError> {
    validate_training_input(x, labels)?;
    if params.step_size <= 0.0 {
        return Err(TabularError::Config(format!(
            "step size must be positive, got {}",
            params.step_size
        )));
    }
    if params.l2 < 0.0 {
        return Err(TabularError::Config(format!("l2 must be non-negative, got {}", params.l2)));
    }

    let d1 = x.n_cols() + 1;
    let mut weights = vec![0.0; N_CLASSES * d1];
    for _ in 0..params.steps {
        let (_, grad) = logistic_loss_and_grad(&weights, x, labels, params.l2);
        for (w, g) in weights.iter_mut().zip(&grad) {
            *w -= params.step_size * g;
        }
    }
    Ok(LogisticModel { params: *params, n_features: x.n_cols(), weights })
}

impl LogisticModel {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Weight on encoded column `j` for class `k` (bias excluded).
    pub fn weight(&self, k: usize, j: usize) -> f64 {
        self.weights[k * (self.n_features + 1) + j]
    }
}

impl Classify for LogisticModel {
    fn predict_proba(&self, x: &FeatureMatrix) -> Result<Vec<Vec<f64>>, TabularError> {
        check_schema(self.n_features, x)?;
        let d1 = self.n_features + 1;
        Ok((0..x.n_rows())
            .map(|i| {
                let row = x.row(i);
                let mut scores = vec![0.0; N_CLASSES];
                for (k, score) in scores.iter_mut().enumerate() {
                    let w = &self.weights[k * d1..(k + 1) * d1];
                    *score =
                        w[self.n_features] + row.iter().zip(w).map(|(v, c)| v * c).sum::<f64>();
                }
                softmax_in_place(&mut scores);
                scores
            })
            .collect())
    }

    fn n_features(&self) -> usize {
        self.n_features
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::tabular::accuracy;
    use rand::Rng;

    #[test]
    fn separated_one_dimensional_classes_are_learned_perfectly() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![if i < 20 { i as f64 * 0.05 } else { 10.0 + i as f64 * 0.05 }])
            .collect();
        let labels: Vec<_> = (0..40)
            .map(|i| if i < 20 { SeverityLabel::Low } else { SeverityLabel::High })
            .collect();
        let x = FeatureMatrix::from_raw(rows).unwrap();
        let model = fit_logistic(&x, &labels, &LogisticParams::default()).unwrap();
        assert_eq!(accuracy(&model.predict(&x).unwrap(), &labels), 1.0);
    }

    #[test]
    fn analytic_gradient_matches_central_differences() {
        let (x, y) = crate::datasynth::gen_blobs(40, 2.0, 31);
        let d1 = x.n_cols() + 1;
        let mut generator = rng::seeded(99);
        for trial in 0..5 {
            let weights: Vec<f64> =
                (0..N_CLASSES * d1).map(|_| generator.random_range(-1.0..1.0)).collect();
            let (_, analytic) = logistic_loss_and_grad(&weights, &x, &y, 0.01);

            let step = 1e-6;
            let mut probe = weights.clone();
            for (j, a) in analytic.iter().enumerate() {
                probe[j] = weights[j] + step;
                let (plus, _) = logistic_loss_and_grad(&probe, &x, &y, 0.01);
                probe[j] = weights[j] - step;
                let (minus, _) = logistic_loss_and_grad(&probe, &x, &y, 0.01);
                probe[j] = weights[j];
                let numeric = (plus - minus) / (2.0 * step);
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
                assert!(rel < 1e-5, "trial {trial} weight {j}: rel error {rel}");
            }
        }
    }

    #[test]
    fn loss_is_non_increasing_under_the_default_step() {
        let (x, y) = crate::datasynth::gen_blobs(90, 2.0, 12);
        let mut weights = vec![0.0; N_CLASSES * (x.n_cols() + 1)];
        let params = LogisticParams::default();
        let mut last = f64::INFINITY;
        for _ in 0..150 {
            let (loss, grad) = logistic_loss_and_grad(&weights, &x, &y, params.l2);
            assert!(loss <= last + 1e-12, "loss rose from {last} to {loss}");
            last = loss;
            for (w, g) in weights.iter_mut().zip(&grad) {
                *w -= params.step_size * g;
            }
        }
    }

    #[test]
    fn gradient_norm_shrinks_at_convergence_on_toy_data() {
        let rows = vec![vec![-2.0], vec![-1.8], vec![-2.2], vec![2.0], vec![1.8], vec![2.2]];
        let labels = vec![
            SeverityLabel::Low,
            SeverityLabel::Low,
            SeverityLabel::Low,
            SeverityLabel::High,
            SeverityLabel::High,
            SeverityLabel::High,
        ];
        let x = FeatureMatrix::from_raw(rows).unwrap();
        let params = LogisticParams { steps: 20_000, step_size: 0.5, l2: 0.01 };
        let model = fit_logistic(&x, &labels, &params).unwrap();
        let (_, grad) = logistic_loss_and_grad(&model.weights, &x, &labels, params.l2);
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        assert!(norm < 1e-4, "gradient norm at convergence {norm}");
    }

    #[test]
    fn probabilities_sum_to_one() {
        let (x, y) = crate::datasynth::gen_blobs(60, 1.0, 2);
        let model = fit_logistic(&x, &y, &LogisticParams::default()).unwrap();
        for row in model.predict_proba(&x).unwrap() {
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }
}
