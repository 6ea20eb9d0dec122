//! The traffic-scene classifier: two conv/pool blocks and two dense layers.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::layers::{
    conv2d, conv2d_backward, dense_backward, dense_forward, flatten, maxpool2x2,
    maxpool_backward, relu, relu_backward, softmax_rows,
};
use super::{Tensor, VisionError};
use crate::rng;

pub const N_CLASSES: usize = 4;
pub const INPUT_SIDE: usize = 32;
const CONV1_FILTERS: usize = 8;
const CONV2_FILTERS: usize = 16;
const HIDDEN_UNITS: usize = 64;
const KERNEL: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conv2dLayer {
    pub kernels: Tensor,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub in_dim: usize,
    pub out_dim: usize,
    /// (out, in) row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    fn init<R: Rng>(in_dim: usize, out_dim: usize, generator: &mut R) -> Self {
        let limit = (6.0 / in_dim as f64).sqrt();
        let weights =
            (0..out_dim * in_dim).map(|_| generator.random_range(-limit..limit)).collect();
        Self { in_dim, out_dim, weights, bias: vec![0.0; out_dim] }
    }
}

/// The layer stack, fixed up to the input shape:
/// Conv(3x3, pad 1, 8) -> ReLU -> MaxPool(2x2) -> Conv(3x3, pad 1, 16)
/// -> ReLU -> MaxPool(2x2) -> Flatten -> Dense(64) -> ReLU -> Dense(4)
/// -> Softmax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnnModel {
    pub input_shape: (usize, usize, usize),
    pub conv1: Conv2dLayer,
    pub conv2: Conv2dLayer,
    pub fc1: Dense,
    pub fc2: Dense,
}

pub(super) struct Trace {
    input: Tensor,
    conv1_out: Tensor,
    relu1: Tensor,
    pool1_argmax: Vec<usize>,
    pool1: Tensor,
    conv2_out: Tensor,
    relu2: Tensor,
    pool2_argmax: Vec<usize>,
    pool2: Tensor,
    flat: Tensor,
    fc1_relu: Tensor,
    pub probs: Tensor,
}

/// Parameter gradients, one entry per parameter group in the same order as
/// [`CnnModel::param_groups_mut`].
pub(super) struct Gradients {
    pub groups: Vec<Vec<f64>>,
}

impl CnnModel {
    /// He-scaled uniform initialization (biases zero), seeded.
    pub fn init(input_shape: (usize, usize, usize), seed: u64) -> Result<Self, VisionError> {
        let (h, w, c) = input_shape;
        if h % 4 != 0 || w % 4 != 0 || h < 8 || w < 8 {
            return Err(VisionError::Shape(format!(
                "input sides must be multiples of 4 and at least 8, got {h}x{w}"
            )));
        }
        if c != 1 && c != 3 {
            return Err(VisionError::Shape(format!("channels must be 1 or 3, got {c}")));
        }
        let mut generator = rng::seeded(seed);
        let mut conv_init = |filters: usize, in_ch: usize| {
            let fan_in = (KERNEL * KERNEL * in_ch) as f64;
            let limit = (6.0 / fan_in).sqrt();
            let data = (0..filters * KERNEL * KERNEL * in_ch)
                .map(|_| generator.random_range(-limit..limit))
                .collect();
            Conv2dLayer {
                kernels: Tensor::from_data(&[filters, KERNEL, KERNEL, in_ch], data)
                    .expect("kernel dims"),
                bias: vec![0.0; filters],
            }
        };
        let conv1 = conv_init(CONV1_FILTERS, c);
        let conv2 = conv_init(CONV2_FILTERS, CONV1_FILTERS);
        let flat_dim = (h / 4) * (w / 4) * CONV2_FILTERS;
        let fc1 = Dense::init(flat_dim, HIDDEN_UNITS, &mut generator);
        let fc2 = Dense::init(HIDDEN_UNITS, N_CLASSES, &mut generator);
        Ok(Self { input_shape, conv1, conv2, fc1, fc2 })
    }

    pub(super) fn forward_trace(&self, batch: &Tensor) -> Result<Trace, VisionError> {
        let (h, w, c) = self.input_shape;
        if batch.dims.len() != 4 || batch.dims[1..] != [h, w, c] {
            return Err(VisionError::Shape(format!(
                "batch dims {:?} do not match model input {h}x{w}x{c}",
                batch.dims
            )));
        }
        let conv1_out = conv2d(batch, &self.conv1.kernels, &self.conv1.bias, 1, 1)?;
        let relu1 = relu(&conv1_out);
        let (pool1, pool1_argmax) = maxpool2x2(&relu1)?;
        let conv2_out = conv2d(&pool1, &self.conv2.kernels, &self.conv2.bias, 1, 1)?;
        let relu2 = relu(&conv2_out);
        let (pool2, pool2_argmax) = maxpool2x2(&relu2)?;
        let flat = flatten(&pool2);
        let fc1_out = dense_forward(&flat, &self.fc1.weights, &self.fc1.bias);
        let fc1_relu = relu(&fc1_out);
        let logits = dense_forward(&fc1_relu, &self.fc2.weights, &self.fc2.bias);
        let probs = softmax_rows(&logits);
        Ok(Trace {
            input: batch.clone(),
            conv1_out,
            relu1,
            pool1_argmax,
            pool1,
            conv2_out,
            relu2,
            pool2_argmax,
            pool2,
            flat,
            fc1_relu,
            probs,
        })
    }

    /// Class probabilities, one row of 4 per sample.
    pub fn forward(&self, batch: &Tensor) -> Result<Vec<Vec<f64>>, VisionError> {
        let trace = self.forward_trace(batch)?;
        Ok((0..batch.batch()).map(|b| trace.probs.row(b).to_vec()).collect())
    }

    /// Mean cross-entropy of the batch against target distributions
    /// (one-hot rows for hard labels).
    pub fn loss(&self, batch: &Tensor, targets: &[Vec<f64>]) -> Result<f64, VisionError> {
        let trace = self.forward_trace(batch)?;
        Ok(cross_entropy(&trace.probs, targets))
    }

    /// Backpropagate the mean cross-entropy. The softmax+cross-entropy
    /// gradient w.r.t. the logits is (p - y)/batch; everything else is the
    /// chain rule through the stack.
    pub(super) fn backward(&self, trace: &Trace, targets: &[Vec<f64>]) -> Gradients {
        let b = trace.input.dims[0];
        let scale = 1.0 / b as f64;
        let mut dlogits = Tensor::zeros(&[b, N_CLASSES]);
        for bi in 0..b {
            for k in 0..N_CLASSES {
                dlogits.data[bi * N_CLASSES + k] =
                    scale * (trace.probs.data[bi * N_CLASSES + k] - targets[bi][k]);
            }
        }

        let (dfc1_relu, dfc2_w, dfc2_b) =
            dense_backward(&trace.fc1_relu, &self.fc2.weights, &dlogits);
        let dfc1_out = relu_backward(&trace.fc1_relu, &dfc1_relu);
        let (dflat, dfc1_w, dfc1_b) = dense_backward(&trace.flat, &self.fc1.weights, &dfc1_out);

        let dpool2 = Tensor { dims: trace.pool2.dims.clone(), data: dflat.data };
        let drelu2 = maxpool_backward(&trace.relu2.dims, &trace.pool2_argmax, &dpool2);
        let dconv2_out = relu_backward(&trace.conv2_out, &drelu2);
        let (dpool1, dconv2_k, dconv2_b) =
            conv2d_backward(&trace.pool1, &self.conv2.kernels, &dconv2_out, 1, 1);

        let drelu1 = maxpool_backward(&trace.relu1.dims, &trace.pool1_argmax, &dpool1);
        let dconv1_out = relu_backward(&trace.conv1_out, &drelu1);
        let (_, dconv1_k, dconv1_b) =
            conv2d_backward(&trace.input, &self.conv1.kernels, &dconv1_out, 1, 1);

        Gradients {
            groups: vec![
                dconv1_k.data,
                dconv1_b,
                dconv2_k.data,
                dconv2_b,
                dfc1_w,
                dfc1_b,
                dfc2_w,
                dfc2_b,
            ],
        }
    }

    /// Smallest distance of any ReLU pre-activation to zero and of any
    /// pooling window's maximum to its runner-up. Finite-difference
    /// gradient checks are only meaningful at points where the loss is
    /// locally smooth, i.e. where this margin comfortably exceeds the
    /// probe step.
    pub fn activation_margin(&self, batch: &Tensor) -> Result<f64, VisionError> {
        let trace = self.forward_trace(batch)?;
        let mut margin = f64::INFINITY;
        for z in trace.conv1_out.data.iter().chain(&trace.conv2_out.data) {
            margin = margin.min(z.abs());
        }
        // fc1 pre-activations: recover them as relu output where positive
        // is exact; near-zero negatives are invisible there, so recompute.
        let fc1_out = dense_forward(&trace.flat, &self.fc1.weights, &self.fc1.bias);
        for z in &fc1_out.data {
            margin = margin.min(z.abs());
        }
        for pooled in [(&trace.relu1, &trace.pool1), (&trace.relu2, &trace.pool2)] {
            let (input, output) = pooled;
            let (h, w, c) = (input.dims[1], input.dims[2], input.dims[3]);
            for bi in 0..input.dims[0] {
                for oy in 0..h / 2 {
                    for ox in 0..w / 2 {
                        for ci in 0..c {
                            let max = output.at4(bi, oy, ox, ci);
                            if max <= 0.0 {
                                // A fully dead window carries no gradient;
                                // ties between zeros are harmless.
                                continue;
                            }
                            let mut runner_up = f64::NEG_INFINITY;
                            let mut seen_max = false;
                            for dy in 0..2 {
                                for dx in 0..2 {
                                    let v = input.at4(bi, oy * 2 + dy, ox * 2 + dx, ci);
                                    if v == max && !seen_max {
                                        seen_max = true;
                                    } else {
                                        runner_up = runner_up.max(v);
                                    }
                                }
                            }
                            margin = margin.min(max - runner_up);
                        }
                    }
                }
            }
        }
        Ok(margin)
    }

    pub(super) fn param_groups_mut(&mut self) -> [&mut [f64]; 8] {
        [
            &mut self.conv1.kernels.data,
            &mut self.conv1.bias,
            &mut self.conv2.kernels.data,
            &mut self.conv2.bias,
            &mut self.fc1.weights,
            &mut self.fc1.bias,
            &mut self.fc2.weights,
            &mut self.fc2.bias,
        ]
    }
}

pub(super) fn cross_entropy(probs: &Tensor, targets: &[Vec<f64>]) -> f64 {
    let (b, k) = (probs.dims[0], probs.dims[1]);
    let mut total = 0.0;
    for bi in 0..b {
        for ki in 0..k {
            if targets[bi][ki] > 0.0 {
                total -= targets[bi][ki] * probs.data[bi * k + ki].max(1e-300).ln();
            }
        }
    }
    total / b as f64
}

pub(super) fn one_hot(label: usize) -> Vec<f64> {
    let mut row = vec![0.0; N_CLASSES];
    row[label] = 1.0;
    row
}

/// A dense-only reference network (Flatten -> Dense -> ReLU -> Dense ->
/// Softmax) used to verify the dense/softmax backward path in isolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseNet {
    pub fc1: Dense,
    pub fc2: Dense,
}

impl DenseNet {
    pub fn init(input_dim: usize, hidden: usize, classes: usize, seed: u64) -> Self {
        let mut generator = rng::seeded(seed);
        Self {
            fc1: Dense::init(input_dim, hidden, &mut generator),
            fc2: Dense::init(hidden, classes, &mut generator),
        }
    }

    pub fn loss(&self, batch: &Tensor, targets: &[Vec<f64>]) -> f64 {
        let hidden = relu(&dense_forward(batch, &self.fc1.weights, &self.fc1.bias));
        let probs = softmax_rows(&dense_forward(&hidden, &self.fc2.weights, &self.fc2.bias));
        cross_entropy(&probs, targets)
    }

    pub(super) fn gradients(&self, batch: &Tensor, targets: &[Vec<f64>]) -> Gradients {
        let b = batch.dims[0];
        let k = self.fc2.out_dim;
        let hidden = relu(&dense_forward(batch, &self.fc1.weights, &self.fc1.bias));
        let probs = softmax_rows(&dense_forward(&hidden, &self.fc2.weights, &self.fc2.bias));
        let scale = 1.0 / b as f64;
        let mut dlogits = Tensor::zeros(&[b, k]);
        for bi in 0..b {
            for ki in 0..k {
                dlogits.data[bi * k + ki] = scale * (probs.data[bi * k + ki] - targets[bi][ki]);
            }
        }
        let (dhidden, dfc2_w, dfc2_b) = dense_backward(&hidden, &self.fc2.weights, &dlogits);
        let dfc1_out = relu_backward(&hidden, &dhidden);
        let (_, dfc1_w, dfc1_b) = dense_backward(batch, &self.fc1.weights, &dfc1_out);
        Gradients { groups: vec![dfc1_w, dfc1_b, dfc2_w, dfc2_b] }
    }

    pub(super) fn param_groups_mut(&mut self) -> [&mut [f64]; 4] {
        [
            &mut self.fc1.weights,
            &mut self.fc1.bias,
            &mut self.fc2.weights,
            &mut self.fc2.bias,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_give_a_uniform_distribution() {
        let mut model = CnnModel::init((32, 32, 1), 1).unwrap();
        for group in model.param_groups_mut() {
            group.fill(0.0);
        }
        let batch = Tensor::from_data(&[1, 32, 32, 1], vec![0.37; 1024]).unwrap();
        let probs = model.forward(&batch).unwrap();
        for p in &probs[0] {
            assert!((p - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        let model = CnnModel::init((32, 32, 1), 7).unwrap();
        let batch = Tensor::from_data(
            &[2, 32, 32, 1],
            (0..2048).map(|i| (i % 255) as f64 / 255.0).collect(),
        )
        .unwrap();
        for row in model.forward(&batch).unwrap() {
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-6, "row sums to {sum}");
        }
    }

    #[test]
    fn fixed_seed_forward_is_reproducible() {
        let a = CnnModel::init((32, 32, 1), 5).unwrap();
        let b = CnnModel::init((32, 32, 1), 5).unwrap();
        assert_eq!(a, b);
        let batch = Tensor::from_data(&[1, 32, 32, 1], vec![0.5; 1024]).unwrap();
        assert_eq!(a.forward(&batch).unwrap(), b.forward(&batch).unwrap());
    }

    #[test]
    fn softmax_cross_entropy_gradient_equals_p_minus_y() {
        // Chain-rule composition: dL/dz_j = sum_k dL/dp_k * dp_k/dz_j with
        // dL/dp_k = -y_k/p_k and dp_k/dz_j = p_k(delta_kj - p_j). The
        // shortcut (p - y) must agree to machine precision.
        let logits = Tensor::from_data(&[1, 4], vec![0.3, -1.2, 2.0, 0.1]).unwrap();
        let probs = softmax_rows(&logits);
        let target = one_hot(2);
        for j in 0..4 {
            let mut composed = 0.0;
            for k in 0..4 {
                if target[k] == 0.0 {
                    continue;
                }
                let dl_dp = -target[k] / probs.data[k];
                let dp_dz = probs.data[k] * (if k == j { 1.0 } else { 0.0 } - probs.data[j]);
                composed += dl_dp * dp_dz;
            }
            let shortcut = probs.data[j] - target[j];
            assert!(
                (composed - shortcut).abs() < 1e-12,
                "component {j}: {composed} vs {shortcut}"
            );
        }
    }

    #[test]
    fn bad_input_shapes_are_rejected() {
        assert!(CnnModel::init((30, 30, 1), 1).is_err());
        assert!(CnnModel::init((32, 32, 2), 1).is_err());
        let model = CnnModel::init((32, 32, 1), 1).unwrap();
        let wrong = Tensor::zeros(&[1, 16, 16, 1]);
        assert!(matches!(model.forward(&wrong), Err(VisionError::Shape(_))));
    }
}
