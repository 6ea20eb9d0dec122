//! Procedural 32x32 traffic-scene images: a fixed template per class plus
//! seeded pixel noise.

use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::datamodel::{ImageClass, ImageSample};
use crate::rng;

pub const IMAGE_SIDE: usize = 32;
const PIXELS: usize = IMAGE_SIDE * IMAGE_SIDE;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageGenSpec {
    pub n: usize,
    /// Additive Gaussian pixel noise per class (clear, congested,
    /// construction, accident).
    pub noise_sigma: [f64; 4],
    pub seed: u64,
}

impl Default for ImageGenSpec {
    fn default() -> Self {
        Self { n: 8_760, noise_sigma: [0.12; 4], seed: 42 }
    }
}

/// The deterministic class motif, before any noise.
///
/// * clear — dark background with sparse dim dots
/// * congested — dense grid of bright vehicle-sized blobs
/// * construction — diagonal stripe motif
/// * accident — bright centered cross with a hot cluster
pub fn class_template(class: ImageClass) -> Vec<f64> {
    fn set(pixels: &mut [f64], y: usize, x: usize, v: f64) {
        pixels[y * IMAGE_SIDE + x] = v;
    }
    let mut pixels = vec![0.0; PIXELS];
    match class {
        ImageClass::Clear => {
            pixels.fill(0.08);
            for k in 0..14 {
                set(&mut pixels, (k * 37 + 11) % IMAGE_SIDE, (k * 23 + 7) % IMAGE_SIDE, 0.30);
            }
        }
        ImageClass::Congested => {
            pixels.fill(0.15);
            for cy in [4usize, 12, 20, 28] {
                for cx in [4usize, 12, 20, 28] {
                    for dy in 0..3 {
                        for dx in 0..3 {
                            set(&mut pixels, cy + dy - 1, cx + dx - 1, 0.85);
                        }
                    }
                }
            }
        }
        ImageClass::Construction => {
            for y in 0..IMAGE_SIDE {
                for x in 0..IMAGE_SIDE {
                    let v = if (x + y) % 8 < 2 { 0.80 } else { 0.10 };
                    set(&mut pixels, y, x, v);
                }
            }
        }
        ImageClass::Accident => {
            pixels.fill(0.10);
            for y in 0..IMAGE_SIDE {
                for x in 14..18 {
                    set(&mut pixels, y, x, 0.95);
                }
            }
            for x in 0..IMAGE_SIDE {
                for y in 14..18 {
                    set(&mut pixels, y, x, 0.95);
                }
            }
        }
    }
    pixels
}

/// Generate labeled images, classes interleaved so any prefix is nearly
/// balanced. Counts split n as evenly as four classes allow.
pub fn gen_images(spec: &ImageGenSpec) -> Result<Vec<ImageSample>, SynthError> {
    if spec.noise_sigma.iter().any(|s| *s < 0.0) {
        return Err(SynthError::Config("noise sigma must be non-negative".into()));
    }
    let templates: Vec<Vec<f64>> = ImageClass::ALL.iter().map(|c| class_template(*c)).collect();
    let mut remaining = [0usize; 4];
    for k in 0..4 {
        remaining[k] = spec.n / 4 + usize::from(k < spec.n % 4);
    }

    let mut generator = rng::seeded(spec.seed);
    let mut samples = Vec::with_capacity(spec.n);
    let mut class = 0;
    while samples.len() < spec.n {
        while remaining[class] == 0 {
            class = (class + 1) % 4;
        }
        remaining[class] -= 1;
        let sigma = spec.noise_sigma[class];
        let pixels: Vec<f64> = templates[class]
            .iter()
            .map(|t| (t + sigma * rng::next_gaussian(&mut generator)).clamp(0.0, 1.0))
            .collect();
        samples.push(ImageSample::new(
            IMAGE_SIDE,
            IMAGE_SIDE,
            1,
            pixels,
            ImageClass::from_index(class)?,
        )?);
        class = (class + 1) % 4;
    }
    Ok(samples)
}

/// Nearest-template classification by squared pixel distance; the
/// reference check for generator separability.
pub fn nearest_template(sample: &ImageSample) -> ImageClass {
    let mut best = ImageClass::Clear;
    let mut best_distance = f64::INFINITY;
    for class in ImageClass::ALL {
        let template = class_template(class);
        let distance: f64 = sample
            .pixels()
            .iter()
            .zip(&template)
            .map(|(p, t)| (p - t) * (p - t))
            .sum();
        if distance < best_distance {
            best_distance = distance;
            best = class;
        }
    }
    best
}
