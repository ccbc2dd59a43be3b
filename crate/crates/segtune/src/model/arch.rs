//! Declarative description of the U-Net variant to build.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the expanding path regains spatial resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum UpsampleMode {
    /// 2x nearest-neighbor resize followed by a 2x2 convolution that
    /// halves the channel count.
    #[default]
    #[serde(rename = "nearest-resize-then-conv")]
    NearestResizeThenConv,
}

/// Activation applied by the 1x1 output head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FinalActivation {
    #[default]
    #[serde(rename = "sigmoid")]
    Sigmoid,
}

/// Hyperparameters of the network family: a symmetric encoder-decoder
/// with `depth` contracting levels, `base_filters` channels in the first
/// block (doubling per level down, halving per level up), and a single
/// dropout layer after the contracting path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureSpec {
    pub input_height: usize,
    pub input_width: usize,
    pub input_channels: usize,
    /// Number of contracting levels; the deepest one is the bottleneck.
    pub depth: usize,
    /// Filter count of the first block; doubles after every maxpool.
    pub base_filters: usize,
    #[serde(default = "default_dropout_rate")]
    pub dropout_rate: f32,
    #[serde(default)]
    pub upsample_mode: UpsampleMode,
    #[serde(default)]
    pub final_activation: FinalActivation,
}

fn default_dropout_rate() -> f32 {
    0.5
}

impl ArchitectureSpec {
    /// Spec with the customary defaults (dropout 0.5, nearest upsampling,
    /// sigmoid head).
    pub fn new(
        input_height: usize,
        input_width: usize,
        input_channels: usize,
        depth: usize,
        base_filters: usize,
    ) -> Self {
        Self {
            input_height,
            input_width,
            input_channels,
            depth,
            base_filters,
            dropout_rate: default_dropout_rate(),
            upsample_mode: UpsampleMode::default(),
            final_activation: FinalActivation::default(),
        }
    }

    pub fn with_dropout_rate(mut self, rate: f32) -> Self {
        self.dropout_rate = rate;
        self
    }

    /// Check every field constraint, naming the first violation.
    pub fn validate(&self) -> Result<()> {
        if self.depth < 1 {
            return Err(Error::Config("depth must be at least 1".into()));
        }
        if self.base_filters < 1 {
            return Err(Error::Config("base_filters must be at least 1".into()));
        }
        if self.input_channels < 1 {
            return Err(Error::Config("input_channels must be at least 1".into()));
        }
        let divisor = 1usize << (self.depth - 1);
        if self.input_height == 0 || self.input_height % divisor != 0 {
            return Err(Error::Config(format!(
                "input_height {} not divisible by 2^(depth-1) = {divisor}",
                self.input_height
            )));
        }
        if self.input_width == 0 || self.input_width % divisor != 0 {
            return Err(Error::Config(format!(
                "input_width {} not divisible by 2^(depth-1) = {divisor}",
                self.input_width
            )));
        }
        if !(0.0..=1.0).contains(&self.dropout_rate) {
            return Err(Error::Config(format!(
                "dropout_rate {} outside [0, 1]",
                self.dropout_rate
            )));
        }
        Ok(())
    }

    /// Filter count at a 1-based contracting level.
    pub fn filters_at_level(&self, level: usize) -> usize {
        self.base_filters << (level - 1)
    }
}
