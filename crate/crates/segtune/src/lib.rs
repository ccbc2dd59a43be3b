//! segtune: layer-selective fine-tuning for U-Net image segmentation.

pub mod error;

pub use error::{Error, Result};
