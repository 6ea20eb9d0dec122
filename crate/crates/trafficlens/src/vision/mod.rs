//! A small convolutional classifier for four-class traffic-scene images,
//! built from first principles: explicit forward and backward passes,
//! finite-difference gradient verification, seeded augmentation and a
//! mini-batch SGD training loop.

mod augment;
mod gradcheck;
mod layers;
mod model;
mod tensor;
mod train;

pub use augment::{augment, random_augment, resize_bilinear, AugmentOp};
pub use gradcheck::{grad_check, grad_check_dense};
pub use layers::{conv2d, maxpool2x2};
pub use model::{CnnModel, Dense, DenseNet, INPUT_SIDE, N_CLASSES};
pub use tensor::Tensor;
pub use train::{predict_classes, train, TrainConfig, TrainHistory};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum VisionError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("value error: {0}")]
    Value(String),
    #[error("training diverged at epoch {epoch}: {message}")]
    Training { epoch: usize, message: String },
}
