//! Shared domain types and dataset-split machinery.
//!
//! Everything here is immutable after construction and safe to share across
//! threads; the operations are pure functions.

mod encode;
mod split;

pub use encode::{encode_features, ColumnKind, ColumnMeta, FeatureEncoder, FeatureMatrix};
pub use split::{Partition, SplitSpec};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("value error: {0}")]
    Value(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("shape error: {0}")]
    Shape(String),
}

/// Uniformly spaced hourly vehicle counts. The spacing is implicit: sample
/// `i` sits at epoch hour `start_hour + i`, so gapped series are not
/// representable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficSeries {
    start_hour: i64,
    values: Vec<f64>,
}

impl TrafficSeries {
    pub fn new(start_hour: i64, values: Vec<f64>) -> Result<Self, DataError> {
        if values.is_empty() {
            return Err(DataError::Value("traffic series must be non-empty".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(DataError::Value(format!(
                "traffic counts must be finite and non-negative, got {bad}"
            )));
        }
        Ok(Self { start_hour, values })
    }

    pub fn start_hour(&self) -> i64 {
        self.start_hour
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 1 by construction
    }
}

/// Accident severity with a fixed integer encoding that serialized models
/// rely on: Low=0, Medium=1, High=2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SeverityLabel {
    Low,
    Medium,
    High,
}

impl SeverityLabel {
    pub const COUNT: usize = 3;
    pub const ALL: [SeverityLabel; 3] =
        [SeverityLabel::Low, SeverityLabel::Medium, SeverityLabel::High];

    pub fn index(self) -> usize {
        match self {
            SeverityLabel::Low => 0,
            SeverityLabel::Medium => 1,
            SeverityLabel::High => 2,
        }
    }

    pub fn from_index(index: usize) -> Result<Self, DataError> {
        match index {
            0 => Ok(SeverityLabel::Low),
            1 => Ok(SeverityLabel::Medium),
            2 => Ok(SeverityLabel::High),
            _ => Err(DataError::Value(format!("severity index {index} out of range"))),
        }
    }

    pub fn parse(token: &str) -> Result<Self, DataError> {
        match token {
            "Low" => Ok(SeverityLabel::Low),
            "Medium" => Ok(SeverityLabel::Medium),
            "High" => Ok(SeverityLabel::High),
            other => Err(DataError::Value(format!(
                "unknown severity {other:?}, expected Low/Medium/High"
            ))),
        }
    }
}

impl fmt::Display for SeverityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SeverityLabel::Low => "Low",
            SeverityLabel::Medium => "Medium",
            SeverityLabel::High => "High",
        };
        f.write_str(name)
    }
}

/// A single raw feature value before encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeatureValue {
    Numeric(f64),
    Categorical(String),
    /// An absent value. Encoding replaces these: categoricals become the
    /// dedicated "unknown" category, numerics the training-set median.
    Missing,
}

/// One accident record: named raw features plus the severity target.
/// All records in a dataset must share an identical feature-name set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccidentRecord {
    pub features: BTreeMap<String, FeatureValue>,
    pub severity: SeverityLabel,
}

/// Traffic-scene image class with the fixed encoding clear=0, congested=1,
/// construction=2, accident=3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ImageClass {
    Clear,
    Congested,
    Construction,
    Accident,
}

impl ImageClass {
    pub const COUNT: usize = 4;
    pub const ALL: [ImageClass; 4] = [
        ImageClass::Clear,
        ImageClass::Congested,
        ImageClass::Construction,
        ImageClass::Accident,
    ];

    pub fn index(self) -> usize {
        match self {
            ImageClass::Clear => 0,
            ImageClass::Congested => 1,
            ImageClass::Construction => 2,
            ImageClass::Accident => 3,
        }
    }

    pub fn from_index(index: usize) -> Result<Self, DataError> {
        match index {
            0 => Ok(ImageClass::Clear),
            1 => Ok(ImageClass::Congested),
            2 => Ok(ImageClass::Construction),
            3 => Ok(ImageClass::Accident),
            _ => Err(DataError::Value(format!("image class index {index} out of range"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ImageClass::Clear => "clear",
            ImageClass::Congested => "congested",
            ImageClass::Construction => "construction",
            ImageClass::Accident => "accident",
        }
    }

    pub fn parse(token: &str) -> Result<Self, DataError> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == token)
            .ok_or_else(|| DataError::Schema(format!("unknown image class {token:?}")))
    }
}

impl fmt::Display for ImageClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A labeled image: row-major H x W x C pixels in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageSample {
    height: usize,
    width: usize,
    channels: usize,
    pixels: Vec<f64>,
    pub label: ImageClass,
}

impl ImageSample {
    pub fn new(
        height: usize,
        width: usize,
        channels: usize,
        pixels: Vec<f64>,
        label: ImageClass,
    ) -> Result<Self, DataError> {
        if height < 8 || width < 8 {
            return Err(DataError::Shape(format!(
                "image must be at least 8x8, got {height}x{width}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(DataError::Shape(format!("channels must be 1 or 3, got {channels}")));
        }
        if pixels.len() != height * width * channels {
            return Err(DataError::Shape(format!(
                "pixel buffer length {} does not match {height}x{width}x{channels}",
                pixels.len()
            )));
        }
        if pixels.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0) {
            return Err(DataError::Value("pixel values must lie in [0, 1]".into()));
        }
        Ok(Self { height, width, channels, pixels, label })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn pixel(&self, y: usize, x: usize, c: usize) -> f64 {
        self.pixels[(y * self.width + x) * self.channels + c]
    }
}
