//! Seeded synthetic data generators and file ingestion.
//!
//! The generators reproduce the dataset shapes the pipelines expect —
//! 10,080 hourly volumes, 14,526 accident records with 42 features,
//! 8,760 labeled 32x32 traffic-scene images — with documented ground-truth
//! structure, so every downstream claim (importance ranking, age
//! monotonicity, class marginals) is checkable against known constants.
//! Same seed, same bytes: every generator is a pure function of its spec.

mod accidents;
mod images;
mod ingest;
mod toy;
mod wordfreq;

pub use accidents::{gen_accidents, AccidentGenSpec};
pub use images::{class_template, gen_images, nearest_template, ImageGenSpec, IMAGE_SIDE};
pub use ingest::{
    load_accidents_csv, load_image_dir, load_traffic_csv, save_accidents_csv, save_image_dir,
    save_traffic_csv,
};
pub use toy::{gen_blobs, gen_checkerboard};
pub use wordfreq::{gen_narratives, word_freq, TermCount};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datamodel::{DataError, TrafficSeries};
use crate::rng;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("config error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("timestamp gap: {0}")]
    Gap(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Hourly traffic volume generator: linear trend plus daily and weekly
/// sine cycles plus Gaussian noise, clamped at zero (counts).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficGenSpec {
    pub n: usize,
    pub base: f64,
    pub slope: f64,
    pub daily_amplitude: f64,
    pub weekly_amplitude: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for TrafficGenSpec {
    fn default() -> Self {
        Self {
            n: 10_080,
            base: 120.0,
            slope: 0.01,
            daily_amplitude: 30.0,
            weekly_amplitude: 8.0,
            noise_sigma: 5.0,
            seed: 42,
        }
    }
}

pub fn gen_traffic(spec: &TrafficGenSpec) -> Result<TrafficSeries, SynthError> {
    if spec.n == 0 {
        return Err(SynthError::Config("traffic series length must be at least 1".into()));
    }
    if spec.daily_amplitude < 0.0 || spec.weekly_amplitude < 0.0 || spec.noise_sigma < 0.0 {
        return Err(SynthError::Config("amplitudes and noise sigma must be non-negative".into()));
    }
    let mut generator = rng::seeded(spec.seed);
    let tau = std::f64::consts::TAU;
    let values = (0..spec.n)
        .map(|t| {
            let t = t as f64;
            let clean = spec.base
                + spec.slope * t
                + spec.daily_amplitude * (tau * t / 24.0).sin()
                + spec.weekly_amplitude * (tau * t / 168.0).sin();
            (clean + spec.noise_sigma * rng::next_gaussian(&mut generator)).max(0.0)
        })
        .collect();
    Ok(TrafficSeries::new(0, values)?)
}
