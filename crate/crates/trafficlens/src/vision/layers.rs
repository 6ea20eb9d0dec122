//! Layer primitives with explicit forward and backward passes.

use super::{Tensor, VisionError};

/// 2-d convolution with zero padding.
///
/// `kernels` has dims (filters, K, K, in_channels) with K odd; the output
/// spatial size is `floor((H + 2*pad - K)/stride) + 1`.
pub fn conv2d(
    input: &Tensor,
    kernels: &Tensor,
    bias: &[f64],
    stride: usize,
    pad: usize,
) -> Result<Tensor, VisionError> {
    let [b, h, w, c_in]: [usize; 4] = input.dims.clone().try_into().map_err(|_| {
        VisionError::Shape("conv2d input must be a (batch, H, W, C) tensor".into())
    })?;
    let [f, kh, kw, kc]: [usize; 4] = kernels.dims.clone().try_into().map_err(|_| {
        VisionError::Shape("conv2d kernels must be a (F, K, K, C) tensor".into())
    })?;
    if kh != kw || kh % 2 == 0 {
        return Err(VisionError::Shape(format!("kernels must be square and odd, got {kh}x{kw}")));
    }
    if kc != c_in {
        return Err(VisionError::Shape(format!(
            "kernel channels {kc} do not match input channels {c_in}"
        )));
    }
    if bias.len() != f {
        return Err(VisionError::Shape(format!("{} biases for {f} filters", bias.len())));
    }
    if stride == 0 || h + 2 * pad < kh || w + 2 * pad < kw {
        return Err(VisionError::Shape("kernel does not fit the padded input".into()));
    }

    let out_h = (h + 2 * pad - kh) / stride + 1;
    let out_w = (w + 2 * pad - kw) / stride + 1;
    let mut out = Tensor::zeros(&[b, out_h, out_w, f]);
    for bi in 0..b {
        for oy in 0..out_h {
            for ox in 0..out_w {
                for fi in 0..f {
                    let mut acc = bias[fi];
                    for dy in 0..kh {
                        let iy = (oy * stride + dy) as isize - pad as isize;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        for dx in 0..kw {
                            let ix = (ox * stride + dx) as isize - pad as isize;
                            if ix < 0 || ix >= w as isize {
                                continue;
                            }
                            for ci in 0..c_in {
                                acc += input.at4(bi, iy as usize, ix as usize, ci)
                                    * kernels.at4(fi, dy, dx, ci);
                            }
                        }
                    }
                    let idx = out.idx4(bi, oy, ox, fi);
                    out.data[idx] = acc;
                }
            }
        }
    }
    Ok(out)
}

/// Gradients of [`conv2d`] w.r.t. input, kernels and bias.
pub(super) fn conv2d_backward(
    input: &Tensor,
    kernels: &Tensor,
    dout: &Tensor,
    stride: usize,
    pad: usize,
) -> (Tensor, Tensor, Vec<f64>) {
    let (b, h, w, c_in) = (input.dims[0], input.dims[1], input.dims[2], input.dims[3]);
    let (f, kh, kw) = (kernels.dims[0], kernels.dims[1], kernels.dims[2]);
    let (out_h, out_w) = (dout.dims[1], dout.dims[2]);

    let mut dinput = Tensor::zeros(&input.dims);
    let mut dkernels = Tensor::zeros(&kernels.dims);
    let mut dbias = vec![0.0; f];
    for bi in 0..b {
        for oy in 0..out_h {
            for ox in 0..out_w {
                for fi in 0..f {
                    let g = dout.at4(bi, oy, ox, fi);
                    dbias[fi] += g;
                    for dy in 0..kh {
                        let iy = (oy * stride + dy) as isize - pad as isize;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        for dx in 0..kw {
                            let ix = (ox * stride + dx) as isize - pad as isize;
                            if ix < 0 || ix >= w as isize {
                                continue;
                            }
                            for ci in 0..c_in {
                                let in_idx = input.idx4(bi, iy as usize, ix as usize, ci);
                                let k_idx = kernels.idx4(fi, dy, dx, ci);
                                dkernels.data[k_idx] += g * input.data[in_idx];
                                dinput.data[in_idx] += g * kernels.data[k_idx];
                            }
                        }
                    }
                }
            }
        }
    }
    (dinput, dkernels, dbias)
}

/// 2x2 max pooling with stride 2. Returns the pooled tensor and, per output
/// element, the flat input index of its maximum, which routes gradients in
/// the backward pass.
pub fn maxpool2x2(input: &Tensor) -> Result<(Tensor, Vec<usize>), VisionError> {
    let [b, h, w, c]: [usize; 4] = input.dims.clone().try_into().map_err(|_| {
        VisionError::Shape("maxpool input must be a (batch, H, W, C) tensor".into())
    })?;
    if h % 2 != 0 || w % 2 != 0 {
        return Err(VisionError::Shape(format!("maxpool needs even spatial dims, got {h}x{w}")));
    }
    let mut out = Tensor::zeros(&[b, h / 2, w / 2, c]);
    let mut argmax = vec![0usize; out.data.len()];
    for bi in 0..b {
        for oy in 0..h / 2 {
            for ox in 0..w / 2 {
                for ci in 0..c {
                    let mut best_idx = input.idx4(bi, oy * 2, ox * 2, ci);
                    let mut best = input.data[best_idx];
                    for (dy, dx) in [(0, 1), (1, 0), (1, 1)] {
                        let idx = input.idx4(bi, oy * 2 + dy, ox * 2 + dx, ci);
                        if input.data[idx] > best {
                            best = input.data[idx];
                            best_idx = idx;
                        }
                    }
                    let out_idx = out.idx4(bi, oy, ox, ci);
                    out.data[out_idx] = best;
                    argmax[out_idx] = best_idx;
                }
            }
        }
    }
    Ok((out, argmax))
}

pub(super) fn maxpool_backward(input_dims: &[usize], argmax: &[usize], dout: &Tensor) -> Tensor {
    let mut dinput = Tensor::zeros(input_dims);
    for (out_idx, &in_idx) in argmax.iter().enumerate() {
        dinput.data[in_idx] += dout.data[out_idx];
    }
    dinput
}

pub(super) fn relu(input: &Tensor) -> Tensor {
    Tensor {
        dims: input.dims.clone(),
        data: input.data.iter().map(|v| v.max(0.0)).collect(),
    }
}

/// Backward through ReLU given the forward *output* (out > 0 iff in > 0).
pub(super) fn relu_backward(output: &Tensor, dout: &Tensor) -> Tensor {
    Tensor {
        dims: dout.dims.clone(),
        data: output
            .data
            .iter()
            .zip(&dout.data)
            .map(|(o, g)| if *o > 0.0 { *g } else { 0.0 })
            .collect(),
    }
}

/// Flatten (B, H, W, C) to (B, H*W*C). Storage is already row-major.
pub(super) fn flatten(input: &Tensor) -> Tensor {
    let b = input.dims[0];
    let rest: usize = input.dims[1..].iter().product();
    Tensor { dims: vec![b, rest], data: input.data.clone() }
}

/// y = W x + b for each batch row; weights are (out, in) row-major.
pub(super) fn dense_forward(input: &Tensor, weights: &[f64], bias: &[f64]) -> Tensor {
    let (b, d_in) = (input.dims[0], input.dims[1]);
    let d_out = bias.len();
    let mut out = Tensor::zeros(&[b, d_out]);
    for bi in 0..b {
        let row = input.row(bi);
        for o in 0..d_out {
            let w = &weights[o * d_in..(o + 1) * d_in];
            out.data[bi * d_out + o] =
                bias[o] + row.iter().zip(w).map(|(x, c)| x * c).sum::<f64>();
        }
    }
    out
}

pub(super) fn dense_backward(
    input: &Tensor,
    weights: &[f64],
    dout: &Tensor,
) -> (Tensor, Vec<f64>, Vec<f64>) {
    let (b, d_in) = (input.dims[0], input.dims[1]);
    let d_out = dout.dims[1];
    let mut dinput = Tensor::zeros(&[b, d_in]);
    let mut dweights = vec![0.0; weights.len()];
    let mut dbias = vec![0.0; d_out];
    for bi in 0..b {
        let x = input.row(bi);
        for o in 0..d_out {
            let g = dout.data[bi * d_out + o];
            dbias[o] += g;
            let w_row = &weights[o * d_in..(o + 1) * d_in];
            let dw_row = &mut dweights[o * d_in..(o + 1) * d_in];
            for j in 0..d_in {
                dw_row[j] += g * x[j];
                dinput.data[bi * d_in + j] += g * w_row[j];
            }
        }
    }
    (dinput, dweights, dbias)
}

/// Row-wise softmax of a (B, K) tensor.
pub(super) fn softmax_rows(logits: &Tensor) -> Tensor {
    let (b, k) = (logits.dims[0], logits.dims[1]);
    let mut out = logits.clone();
    for bi in 0..b {
        let row = &mut out.data[bi * k..(bi + 1) * k];
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    #[test]
    fn one_by_one_identity_kernel_reproduces_the_input() {
        let input = Tensor::from_data(
            &[1, 3, 3, 1],
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0],
        )
        .unwrap();
        let kernel = Tensor::from_data(&[1, 1, 1, 1], vec![1.0]).unwrap();
        let out = conv2d(&input, &kernel, &[0.0], 1, 0).unwrap();
        assert_eq!(out.dims, vec![1, 3, 3, 1]);
        assert_eq!(out.data, input.data);
    }

    #[test]
    fn all_ones_kernel_counts_the_overlap() {
        let input = Tensor::from_data(&[1, 5, 5, 1], vec![1.0; 25]).unwrap();
        let kernel = Tensor::from_data(&[1, 3, 3, 1], vec![1.0; 9]).unwrap();
        let out = conv2d(&input, &kernel, &[0.0], 1, 1).unwrap();
        assert_eq!(out.dims, vec![1, 5, 5, 1]);
        assert_eq!(out.at4(0, 2, 2, 0), 9.0, "center sees the full window");
        assert_eq!(out.at4(0, 0, 0, 0), 4.0, "corner sees a 2x2 overlap");
        assert_eq!(out.at4(0, 0, 2, 0), 6.0, "edge sees a 2x3 overlap");
    }

    #[test]
    fn random_conv_matches_a_naive_quadruple_loop_oracle() {
        let mut generator = rng::seeded(11);
        let input = Tensor::from_data(
            &[1, 8, 8, 1],
            (0..64).map(|_| generator.random_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let kernel = Tensor::from_data(
            &[1, 3, 3, 1],
            (0..9).map(|_| generator.random_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let bias = [0.3];
        let out = conv2d(&input, &kernel, &bias, 1, 1).unwrap();

        // Direct definition, written independently of the implementation.
        for y in 0..8usize {
            for x in 0..8usize {
                let mut want = bias[0];
                for dy in 0..3usize {
                    for dx in 0..3usize {
                        let iy = y as isize + dy as isize - 1;
                        let ix = x as isize + dx as isize - 1;
                        if (0..8).contains(&iy) && (0..8).contains(&ix) {
                            want += input.at4(0, iy as usize, ix as usize, 0)
                                * kernel.at4(0, dy, dx, 0);
                        }
                    }
                }
                assert!(
                    (out.at4(0, y, x, 0) - want).abs() < 1e-12,
                    "mismatch at ({y},{x})"
                );
            }
        }
    }

    #[test]
    fn channel_mismatch_is_a_shape_error() {
        let input = Tensor::zeros(&[1, 4, 4, 2]);
        let kernel = Tensor::zeros(&[1, 3, 3, 1]);
        assert!(matches!(
            conv2d(&input, &kernel, &[0.0], 1, 1),
            Err(VisionError::Shape(_))
        ));
    }

    #[test]
    fn maxpool_constant_input_stays_constant() {
        let input = Tensor::from_data(&[1, 4, 4, 1], vec![0.7; 16]).unwrap();
        let (out, _) = maxpool2x2(&input).unwrap();
        assert!(out.data.iter().all(|v| *v == 0.7));
    }

    #[test]
    fn maxpool_picks_the_bottom_right_of_an_ascending_block() {
        let input = Tensor::from_data(&[1, 2, 2, 1], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let (out, argmax) = maxpool2x2(&input).unwrap();
        assert_eq!(out.data, vec![4.0]);
        assert_eq!(argmax, vec![3], "flat index of the bottom-right cell");
    }

    #[test]
    fn random_maxpool_matches_a_window_scan_oracle() {
        let mut generator = rng::seeded(5);
        let input = Tensor::from_data(
            &[1, 6, 6, 1],
            (0..36).map(|_| generator.random_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let (out, _) = maxpool2x2(&input).unwrap();
        for oy in 0..3usize {
            for ox in 0..3usize {
                let window = [
                    input.at4(0, oy * 2, ox * 2, 0),
                    input.at4(0, oy * 2, ox * 2 + 1, 0),
                    input.at4(0, oy * 2 + 1, ox * 2, 0),
                    input.at4(0, oy * 2 + 1, ox * 2 + 1, 0),
                ];
                let want = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                assert_eq!(out.at4(0, oy, ox, 0), want);
            }
        }
    }

    #[test]
    fn odd_spatial_dims_are_a_shape_error() {
        let input = Tensor::zeros(&[1, 5, 4, 1]);
        assert!(matches!(maxpool2x2(&input), Err(VisionError::Shape(_))));
    }

    #[test]
    fn pooling_and_conv_shape_arithmetic_match_the_closed_forms() {
        for side in (8..=64).step_by(4) {
            let input = Tensor::zeros(&[1, side, side, 1]);
            let kernel = Tensor::zeros(&[2, 3, 3, 1]);
            let out = conv2d(&input, &kernel, &[0.0, 0.0], 1, 1).unwrap();
            assert_eq!(out.dims[1], (side + 2 - 3) + 1);
            let (pooled, _) = maxpool2x2(&input).unwrap();
            assert_eq!(pooled.dims[1], side / 2);
        }
    }
}
