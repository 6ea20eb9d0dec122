//! Finite-difference verification of every backward pass.

use super::model::{DenseNet, Gradients};
use super::{CnnModel, Tensor, VisionError};

const FD_STEP: f64 = 1e-5;

/// Compare analytic gradients against central finite differences for every
/// parameter group of the model, on one sample. Returns the maximum
/// per-group relative error `|a - n| / (|a| + |n|)` measured in the L2
/// norm. Run this on a downsized model (8x8 input): full resolution only
/// slows the check down without sharpening it.
pub fn grad_check(
    model: &CnnModel,
    sample: &Tensor,
    target: &[Vec<f64>],
) -> Result<f64, VisionError> {
    let trace = model.forward_trace(sample)?;
    let analytic = model.backward(&trace, target);
    let mut probe = model.clone();
    let loss = |m: &CnnModel| m.loss(sample, target);
    max_group_error(&analytic, &mut probe, loss)
}

/// As [`grad_check`], for the dense-only reference network.
pub fn grad_check_dense(
    net: &DenseNet,
    sample: &Tensor,
    target: &[Vec<f64>],
) -> Result<f64, VisionError> {
    let analytic = net.gradients(sample, target);
    let mut probe = net.clone();
    let loss = |n: &DenseNet| Ok(n.loss(sample, target));
    max_dense_group_error(&analytic, &mut probe, loss)
}

fn relative_l2_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n) * (a - n))
        .sum::<f64>()
        .sqrt();
    let a_norm: f64 = analytic.iter().map(|v| v * v).sum::<f64>().sqrt();
    let n_norm: f64 = numeric.iter().map(|v| v * v).sum::<f64>().sqrt();
    diff / (a_norm + n_norm + 1e-12)
}

fn max_group_error<F>(
    analytic: &Gradients,
    probe: &mut CnnModel,
    loss: F,
) -> Result<f64, VisionError>
where
    F: Fn(&CnnModel) -> Result<f64, VisionError>,
{
    let mut worst: f64 = 0.0;
    for (group_idx, analytic_group) in analytic.groups.iter().enumerate() {
        let mut numeric = vec![0.0; analytic_group.len()];
        for j in 0..analytic_group.len() {
            let original = probe.param_groups_mut()[group_idx][j];
            probe.param_groups_mut()[group_idx][j] = original + FD_STEP;
            let plus = loss(probe)?;
            probe.param_groups_mut()[group_idx][j] = original - FD_STEP;
            let minus = loss(probe)?;
            probe.param_groups_mut()[group_idx][j] = original;
            numeric[j] = (plus - minus) / (2.0 * FD_STEP);
        }
        worst = worst.max(relative_l2_error(analytic_group, &numeric));
    }
    Ok(worst)
}

fn max_dense_group_error<F>(
    analytic: &Gradients,
    probe: &mut DenseNet,
    loss: F,
) -> Result<f64, VisionError>
where
    F: Fn(&DenseNet) -> Result<f64, VisionError>,
{
    let mut worst: f64 = 0.0;
    for (group_idx, analytic_group) in analytic.groups.iter().enumerate() {
        let mut numeric = vec![0.0; analytic_group.len()];
        for j in 0..analytic_group.len() {
            let original = probe.param_groups_mut()[group_idx][j];
            probe.param_groups_mut()[group_idx][j] = original + FD_STEP;
            let plus = loss(probe)?;
            probe.param_groups_mut()[group_idx][j] = original - FD_STEP;
            let minus = loss(probe)?;
            probe.param_groups_mut()[group_idx][j] = original;
            numeric[j] = (plus - minus) / (2.0 * FD_STEP);
        }
        worst = worst.max(relative_l2_error(analytic_group, &numeric));
    }
    Ok(worst)
}
