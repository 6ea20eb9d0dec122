//! Mini-batch SGD with momentum on cross-entropy.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::augment::random_augment;
use super::model::{one_hot, CnnModel};
use super::{Tensor, VisionError};
use crate::datamodel::ImageSample;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub seed: u64,
    pub augment: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 5,
            batch_size: 32,
            learning_rate: 0.05,
            momentum: 0.9,
            seed: 42,
            augment: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    /// Mean batch loss per epoch.
    pub epoch_loss: Vec<f64>,
    /// Training accuracy per epoch, measured on the fly.
    pub epoch_accuracy: Vec<f64>,
}

/// Train in place. Shuffling is re-seeded per epoch from the config seed,
/// so a fixed seed reproduces the final parameters bit for bit. Divergence
/// (a non-finite batch loss) aborts with an error naming the epoch.
pub fn train(
    model: &mut CnnModel,
    dataset: &[ImageSample],
    cfg: &TrainConfig,
) -> Result<TrainHistory, VisionError> {
    if dataset.is_empty() {
        return Err(VisionError::Shape("training set is empty".into()));
    }
    if cfg.epochs < 1 || cfg.batch_size < 1 {
        return Err(VisionError::Config("epochs and batch size must be at least 1".into()));
    }
    if cfg.learning_rate <= 0.0 {
        return Err(VisionError::Config(format!(
            "learning rate must be positive, got {}",
            cfg.learning_rate
        )));
    }

    let mut velocity: Vec<Vec<f64>> =
        model.param_groups_mut().iter().map(|g| vec![0.0; g.len()]).collect();
    let mut history =
        TrainHistory { epoch_loss: Vec::with_capacity(cfg.epochs), epoch_accuracy: Vec::new() };

    for epoch in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..dataset.len()).collect();
        let mut epoch_rng = rng::substream(cfg.seed, epoch as u64);
        order.shuffle(&mut epoch_rng);

        let mut loss_sum = 0.0;
        let mut hits = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let mut augmented: Vec<ImageSample> = Vec::new();
            let batch_refs: Vec<&ImageSample> = if cfg.augment {
                for &i in chunk {
                    augmented.push(random_augment(&dataset[i], &mut epoch_rng)?);
                }
                augmented.iter().collect()
            } else {
                chunk.iter().map(|&i| &dataset[i]).collect()
            };
            let batch = Tensor::from_images(&batch_refs)?;
            let targets: Vec<Vec<f64>> =
                chunk.iter().map(|&i| one_hot(dataset[i].label.index())).collect();

            let trace = model.forward_trace(&batch)?;
            if !trace.probs.all_finite() {
                return Err(VisionError::Training {
                    epoch,
                    message: "probabilities became non-finite".into(),
                });
            }
            for (row, &i) in chunk.iter().enumerate() {
                let probs = trace.probs.row(row);
                let predicted = probs
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                    .map(|(k, _)| k)
                    .unwrap();
                if predicted == dataset[i].label.index() {
                    hits += 1;
                }
            }
            let batch_loss = super::model::cross_entropy(&trace.probs, &targets);
            if !batch_loss.is_finite() {
                return Err(VisionError::Training {
                    epoch,
                    message: format!("batch loss became {batch_loss}"),
                });
            }
            loss_sum += batch_loss * chunk.len() as f64;

            let grads = model.backward(&trace, &targets);
            for ((group, grad), vel) in model
                .param_groups_mut()
                .into_iter()
                .zip(&grads.groups)
                .zip(velocity.iter_mut())
            {
                for j in 0..group.len() {
                    vel[j] = cfg.momentum * vel[j] - cfg.learning_rate * grad[j];
                    group[j] += vel[j];
                }
            }
        }
        history.epoch_loss.push(loss_sum / dataset.len() as f64);
        history.epoch_accuracy.push(hits as f64 / dataset.len() as f64);
    }
    Ok(history)
}

/// Argmax class indices for a set of images, batched.
pub fn predict_classes(
    model: &CnnModel,
    samples: &[ImageSample],
    batch_size: usize,
) -> Result<Vec<usize>, VisionError> {
    let mut out = Vec::with_capacity(samples.len());
    for chunk in samples.chunks(batch_size.max(1)) {
        let refs: Vec<&ImageSample> = chunk.iter().collect();
        let batch = Tensor::from_images(&refs)?;
        for row in model.forward(&batch)? {
            let predicted = row
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(k, _)| k)
                .unwrap();
            out.push(predicted);
        }
    }
    Ok(out)
}
