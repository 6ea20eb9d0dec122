//! Contiguous row-major tensor, at most four dimensions.

use serde::{Deserialize, Serialize};

use super::VisionError;
use crate::datamodel::ImageSample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(dims: &[usize]) -> Self {
        assert!((1..=4).contains(&dims.len()), "tensors carry 1 to 4 dims");
        let len = dims.iter().product();
        Self { dims: dims.to_vec(), data: vec![0.0; len] }
    }

    pub fn from_data(dims: &[usize], data: Vec<f64>) -> Result<Self, VisionError> {
        let expected: usize = dims.iter().product();
        if data.len() != expected {
            return Err(VisionError::Shape(format!(
                "{} values for dims {dims:?} (need {expected})",
                data.len()
            )));
        }
        Ok(Self { dims: dims.to_vec(), data })
    }

    /// Stack image samples into a (batch, H, W, C) tensor.
    pub fn from_images(samples: &[&ImageSample]) -> Result<Self, VisionError> {
        let Some(first) = samples.first() else {
            return Err(VisionError::Shape("cannot build a tensor from zero images".into()));
        };
        let (h, w, c) = (first.height(), first.width(), first.channels());
        let mut data = Vec::with_capacity(samples.len() * h * w * c);
        for sample in samples {
            if (sample.height(), sample.width(), sample.channels()) != (h, w, c) {
                return Err(VisionError::Shape("images in a batch must share a shape".into()));
            }
            data.extend_from_slice(sample.pixels());
        }
        Ok(Self { dims: vec![samples.len(), h, w, c], data })
    }

    pub fn batch(&self) -> usize {
        self.dims[0]
    }

    #[inline]
    pub fn idx4(&self, b: usize, y: usize, x: usize, c: usize) -> usize {
        debug_assert_eq!(self.dims.len(), 4);
        ((b * self.dims[1] + y) * self.dims[2] + x) * self.dims[3] + c
    }

    #[inline]
    pub fn at4(&self, b: usize, y: usize, x: usize, c: usize) -> f64 {
        self.data[self.idx4(b, y, x, c)]
    }

    /// Row `b` of a 2-d tensor.
    pub fn row(&self, b: usize) -> &[f64] {
        debug_assert_eq!(self.dims.len(), 2);
        let w = self.dims[1];
        &self.data[b * w..(b + 1) * w]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
