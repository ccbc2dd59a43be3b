//! Single-channel image tensors, the currency of the data pipeline.

use ndarray::Array2;

use crate::error::{Error, Result};

/// A grayscale image with values in `[0, 1]`, stored row-major as
/// `(height, width)`. Masks are the special case where every value is
/// exactly `0.0` or `1.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTensor {
    data: Array2<f32>,
}

impl ImageTensor {
    /// Wrap an array, checking the `[0, 1]` value range.
    pub fn new(data: Array2<f32>) -> Result<Self> {
        if let Some(bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v) || v.is_nan()) {
            return Err(Error::Argument(format!(
                "image tensor value {bad} outside [0, 1]"
            )));
        }
        Ok(Self { data })
    }

    /// Wrap an array that is already known to be in range.
    ///
    /// Panics in debug builds if the range check fails.
    pub(crate) fn from_raw(data: Array2<f32>) -> Self {
        debug_assert!(data.iter().all(|v| (0.0..=1.0).contains(v)));
        Self { data }
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            data: Array2::zeros((height, width)),
        }
    }

    pub fn height(&self) -> usize {
        self.data.nrows()
    }

    pub fn width(&self) -> usize {
        self.data.ncols()
    }

    /// Channel count; the pipeline collapses everything to grayscale.
    pub fn channels(&self) -> usize {
        1
    }

    pub fn data(&self) -> &Array2<f32> {
        &self.data
    }

    pub fn into_data(self) -> Array2<f32> {
        self.data
    }

    /// True when every value is exactly 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Number of pixels.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_out_of_range_values() {
        assert!(ImageTensor::new(array![[0.0, 1.5]]).is_err());
        assert!(ImageTensor::new(array![[-0.1, 0.5]]).is_err());
        assert!(ImageTensor::new(array![[0.0, 1.0], [0.25, 0.75]]).is_ok());
    }

    #[test]
    fn binarity_check() {
        assert!(ImageTensor::new(array![[0.0, 1.0]]).unwrap().is_binary());
        assert!(!ImageTensor::new(array![[0.0, 0.5]]).unwrap().is_binary());
    }
}
