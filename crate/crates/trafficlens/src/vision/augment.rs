//! Label-preserving image augmentation: flips, quarter turns, and bilinear
//! rescaling with center crop/pad.

use rand::Rng;

use super::VisionError;
use crate::datamodel::ImageSample;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AugmentOp {
    FlipH,
    FlipV,
    /// Counter-clockwise quarter turns (k mod 4). Square images only.
    Rot90(u8),
    /// Rescale by `s` then center-crop or zero-pad back to the original
    /// shape. Accepted range is [0.5, 2.0].
    Scale(f64),
}

/// Apply one deterministic augmentation. Output shape, value range and
/// label all match the input.
pub fn augment(image: &ImageSample, op: AugmentOp) -> Result<ImageSample, VisionError> {
    let (h, w, c) = (image.height(), image.width(), image.channels());
    let pixels = match op {
        AugmentOp::FlipH => remap(image, |y, x| (y, w - 1 - x)),
        AugmentOp::FlipV => remap(image, |y, x| (h - 1 - y, x)),
        AugmentOp::Rot90(k) => {
            if h != w {
                return Err(VisionError::Shape(format!(
                    "quarter turns need square images, got {h}x{w}"
                )));
            }
            match k % 4 {
                0 => image.pixels().to_vec(),
                // (y, x) in the output reads from one turn less.
                1 => remap(image, |y, x| (x, w - 1 - y)),
                2 => remap(image, |y, x| (h - 1 - y, w - 1 - x)),
                _ => remap(image, |y, x| (h - 1 - x, y)),
            }
        }
        AugmentOp::Scale(s) => {
            if !(0.5..=2.0).contains(&s) {
                return Err(VisionError::Config(format!(
                    "scale factor must lie in [0.5, 2.0], got {s}"
                )));
            }
            scale_center(image, s)
        }
    };
    ImageSample::new(h, w, c, pixels, image.label)
        .map_err(|e| VisionError::Value(e.to_string()))
}

/// Draw one augmentation with the given generator: flips, quarter turns,
/// or a scale jitter in [0.8, 1.2].
pub fn random_augment<R: Rng>(
    image: &ImageSample,
    generator: &mut R,
) -> Result<ImageSample, VisionError> {
    let op = match generator.random_range(0..4u8) {
        0 => AugmentOp::FlipH,
        1 => AugmentOp::FlipV,
        2 => AugmentOp::Rot90(generator.random_range(1..4)),
        _ => AugmentOp::Scale(generator.random_range(0.8..=1.2)),
    };
    augment(image, op)
}

fn remap(image: &ImageSample, source: impl Fn(usize, usize) -> (usize, usize)) -> Vec<f64> {
    let (h, w, c) = (image.height(), image.width(), image.channels());
    let mut out = vec![0.0; h * w * c];
    for y in 0..h {
        for x in 0..w {
            let (sy, sx) = source(y, x);
            for ch in 0..c {
                out[(y * w + x) * c + ch] = image.pixel(sy, sx, ch);
            }
        }
    }
    out
}

/// Bilinear resample of a single-channel image; sampling coordinates are
/// clamped to the edges.
pub fn resize_bilinear(
    src: &[f64],
    src_h: usize,
    src_w: usize,
    dst_h: usize,
    dst_w: usize,
) -> Vec<f64> {
    let mut out = vec![0.0; dst_h * dst_w];
    let y_ratio = src_h as f64 / dst_h as f64;
    let x_ratio = src_w as f64 / dst_w as f64;
    for y in 0..dst_h {
        let sy = ((y as f64 + 0.5) * y_ratio - 0.5).clamp(0.0, (src_h - 1) as f64);
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(src_h - 1);
        let fy = sy - y0 as f64;
        for x in 0..dst_w {
            let sx = ((x as f64 + 0.5) * x_ratio - 0.5).clamp(0.0, (src_w - 1) as f64);
            let x0 = sx.floor() as usize;
            let x1 = (x0 + 1).min(src_w - 1);
            let fx = sx - x0 as f64;
            let top = src[y0 * src_w + x0] * (1.0 - fx) + src[y0 * src_w + x1] * fx;
            let bottom = src[y1 * src_w + x0] * (1.0 - fx) + src[y1 * src_w + x1] * fx;
            out[y * dst_w + x] = top * (1.0 - fy) + bottom * fy;
        }
    }
    out
}

fn scale_center(image: &ImageSample, s: f64) -> Vec<f64> {
    let (h, w, c) = (image.height(), image.width(), image.channels());
    let new_h = ((h as f64 * s).round() as usize).max(1);
    let new_w = ((w as f64 * s).round() as usize).max(1);

    // Per-channel resample, then paste centered into a zeroed canvas.
    let mut out = vec![0.0; h * w * c];
    for ch in 0..c {
        let plane: Vec<f64> =
            (0..h * w).map(|i| image.pixels()[i * c + ch]).collect();
        let resized = resize_bilinear(&plane, h, w, new_h, new_w);

        if new_h >= h {
            let off_y = (new_h - h) / 2;
            let off_x = (new_w - w) / 2;
            for y in 0..h {
                for x in 0..w {
                    out[(y * w + x) * c + ch] = resized[(y + off_y) * new_w + (x + off_x)];
                }
            }
        } else {
            let off_y = (h - new_h) / 2;
            let off_x = (w - new_w) / 2;
            for y in 0..new_h {
                for x in 0..new_w {
                    out[((y + off_y) * w + (x + off_x)) * c + ch] = resized[y * new_w + x];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::ImageClass;
    use crate::rng;

    fn gradient_image() -> ImageSample {
        let pixels: Vec<f64> = (0..16 * 16).map(|i| (i % 256) as f64 / 255.0).collect();
        ImageSample::new(16, 16, 1, pixels, ImageClass::Congested).unwrap()
    }

    #[test]
    fn horizontal_flip_is_an_involution() {
        let img = gradient_image();
        let once = augment(&img, AugmentOp::FlipH).unwrap();
        let twice = augment(&once, AugmentOp::FlipH).unwrap();
        assert_eq!(img, twice);
        assert_ne!(img, once);
    }

    #[test]
    fn vertical_flip_is_an_involution() {
        let img = gradient_image();
        let twice =
            augment(&augment(&img, AugmentOp::FlipV).unwrap(), AugmentOp::FlipV).unwrap();
        assert_eq!(img, twice);
    }

    #[test]
    fn four_quarter_turns_are_the_identity() {
        let img = gradient_image();
        let mut rotated = img.clone();
        for _ in 0..4 {
            rotated = augment(&rotated, AugmentOp::Rot90(1)).unwrap();
        }
        assert_eq!(img, rotated);
        // A single turn and a triple turn must invert each other.
        let once = augment(&img, AugmentOp::Rot90(1)).unwrap();
        let back = augment(&once, AugmentOp::Rot90(3)).unwrap();
        assert_eq!(img, back);
    }

    #[test]
    fn unit_scale_is_the_identity() {
        let img = gradient_image();
        let scaled = augment(&img, AugmentOp::Scale(1.0)).unwrap();
        for (a, b) in img.pixels().iter().zip(scaled.pixels()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_scale_is_a_config_error() {
        let img = gradient_image();
        assert!(matches!(
            augment(&img, AugmentOp::Scale(0.3)),
            Err(VisionError::Config(_))
        ));
        assert!(matches!(
            augment(&img, AugmentOp::Scale(2.5)),
            Err(VisionError::Config(_))
        ));
    }

    #[test]
    fn all_ops_preserve_shape_range_and_label() {
        let img = gradient_image();
        let mut generator = rng::seeded(3);
        for trial in 0..40 {
            let out = random_augment(&img, &mut generator).unwrap();
            assert_eq!((out.height(), out.width()), (16, 16), "trial {trial}");
            assert_eq!(out.label, img.label);
            assert!(out.pixels().iter().all(|p| (0.0..=1.0).contains(p)));
        }
    }

    #[test]
    fn downscale_pads_with_zeros_at_the_border() {
        let img = ImageSample::new(16, 16, 1, vec![1.0; 256], ImageClass::Clear).unwrap();
        let out = augment(&img, AugmentOp::Scale(0.5)).unwrap();
        assert_eq!(out.pixel(0, 0, 0), 0.0, "corner should be padding");
        assert!(out.pixel(8, 8, 0) > 0.99, "center should hold image content");
    }
}
