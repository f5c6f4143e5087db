//! The two segmentation architectures, their training loop and model file.
//!
//! * Encoder-decoder TCN: `num_layers` encoder layers (temporal conv,
//!   activation, spatial dropout, width-2 max pool) mirrored by a decoder
//!   (upsample, conv, activation, dropout), then a per-frame linear head and
//!   softmax. Filter counts follow the schedule `96 + 32*l` unless
//!   overridden.
//! * Dilated TCN: an input projection to `num_filters` channels, then
//!   `num_blocks` residual blocks of `layers_per_block` two-tap dilated
//!   convolutions (dilations 1, 2, 4, ... within each block; a third tap on
//!   the future side in acausal mode). Block outputs are summed into a skip
//!   path, passed through two ReLU stages and a linear head.
//!
//! Models are built, trained and serialized deterministically from seeds.

mod dilated;
mod ed_tcn;
mod format;
mod model;
mod train;

pub use format::{load_model, read_model, save_model, write_model};
pub use model::{GradBuffer, TcnModel, TrainMeta};
pub use train::{train, TrainConfig, TrainReport};

use crate::error::{Result, TcnError};
use crate::nn::Activation;

/// Default filter count for 1-based encoder layer `l`.
pub fn default_filter_schedule(num_layers: usize) -> Vec<usize> {
    (1..=num_layers).map(|l| 96 + 32 * l).collect()
}

/// Frames covered by an encoder-decoder TCN with filter duration `d` and
/// `layers` encoder layers: `d * (2^layers - 1) + 1`.
pub fn receptive_field_ed(duration: usize, layers: usize) -> usize {
    duration * ((1usize << layers) - 1) + 1
}

/// Frames covered by a dilated TCN with `blocks` blocks of `layers` layers:
/// `blocks * 2^layers`.
pub fn receptive_field_dilated(blocks: usize, layers: usize) -> usize {
    blocks * (1usize << layers)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdTcnSpec {
    pub input_dim: usize,
    pub num_classes: usize,
    /// Encoder depth L (the decoder mirrors it).
    pub num_layers: usize,
    /// Filter duration d (taps per convolution).
    pub filter_duration: usize,
    pub activation: Activation,
    pub causal: bool,
    /// Filters per encoder layer; decoder layer l reuses entry l.
    pub filters: Vec<usize>,
}

impl EdTcnSpec {
    /// Spec with the default schedule, normalized-ReLU activation, acausal.
    pub fn new(input_dim: usize, num_classes: usize, num_layers: usize, duration: usize) -> Self {
        EdTcnSpec {
            input_dim,
            num_classes,
            num_layers,
            filter_duration: duration,
            activation: Activation::NormRelu,
            causal: false,
            filters: default_filter_schedule(num_layers),
        }
    }

    pub fn receptive_field(&self) -> usize {
        receptive_field_ed(self.filter_duration, self.num_layers)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.num_classes == 0 {
            return Err(TcnError::config(
                "input_dim and num_classes must be at least 1",
            ));
        }
        if self.num_layers == 0 {
            return Err(TcnError::config("encoder needs at least one layer"));
        }
        if self.filter_duration == 0 {
            return Err(TcnError::config("filter duration must be at least 1"));
        }
        if self.filters.len() != self.num_layers {
            return Err(TcnError::config(format!(
                "{} filter counts for {} layers",
                self.filters.len(),
                self.num_layers
            )));
        }
        if self.filters.contains(&0) {
            return Err(TcnError::config("filter counts must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DilatedTcnSpec {
    pub input_dim: usize,
    pub num_classes: usize,
    /// Block count B; blocks are stacked sequentially.
    pub num_blocks: usize,
    /// Layers per block L; layer l uses dilation 2^l (l = 0..L-1).
    pub layers_per_block: usize,
    /// Channel width F_w carried through every block.
    pub num_filters: usize,
    pub activation: Activation,
    pub causal: bool,
}

impl DilatedTcnSpec {
    /// Spec with width 128, gated activation, causal convolutions.
    pub fn new(
        input_dim: usize,
        num_classes: usize,
        num_blocks: usize,
        layers_per_block: usize,
    ) -> Self {
        DilatedTcnSpec {
            input_dim,
            num_classes,
            num_blocks,
            layers_per_block,
            num_filters: 128,
            activation: Activation::Gated,
            causal: true,
        }
    }

    pub fn receptive_field(&self) -> usize {
        receptive_field_dilated(self.num_blocks, self.layers_per_block)
    }

    /// Dilation of every layer in stacking order (block-major).
    pub fn dilations(&self) -> Vec<usize> {
        (0..self.num_blocks)
            .flat_map(|_| (0..self.layers_per_block).map(|l| 1usize << l))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.num_classes == 0 {
            return Err(TcnError::config(
                "input_dim and num_classes must be at least 1",
            ));
        }
        if self.num_blocks == 0 || self.layers_per_block == 0 {
            return Err(TcnError::config(
                "need at least one block and one layer per block",
            ));
        }
        if self.num_filters == 0 {
            return Err(TcnError::config("filter width must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    EdTcn(EdTcnSpec),
    Dilated(DilatedTcnSpec),
}

impl ModelSpec {
    pub fn input_dim(&self) -> usize {
        match self {
            ModelSpec::EdTcn(s) => s.input_dim,
            ModelSpec::Dilated(s) => s.input_dim,
        }
    }

    pub fn num_classes(&self) -> usize {
        match self {
            ModelSpec::EdTcn(s) => s.num_classes,
            ModelSpec::Dilated(s) => s.num_classes,
        }
    }

    pub fn causal(&self) -> bool {
        match self {
            ModelSpec::EdTcn(s) => s.causal,
            ModelSpec::Dilated(s) => s.causal,
        }
    }

    pub fn receptive_field(&self) -> usize {
        match self {
            ModelSpec::EdTcn(s) => s.receptive_field(),
            ModelSpec::Dilated(s) => s.receptive_field(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::EdTcn(s) => s.validate(),
            ModelSpec::Dilated(s) => s.validate(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn receptive_field_formulas() {
        assert_eq!(receptive_field_ed(1, 1), 2);
        assert_eq!(receptive_field_ed(15, 2), 46);
        assert_eq!(receptive_field_ed(2, 3), 15);
        assert_eq!(receptive_field_dilated(4, 5), 128);
        assert_eq!(receptive_field_dilated(3, 5), 96);
        assert_eq!(receptive_field_dilated(1, 1), 2);
    }

    #[test]
    fn default_schedule_adds_32_per_layer() {
        assert_eq!(default_filter_schedule(3), vec![128, 160, 192]);
    }

    #[test]
    fn dilations_reset_per_block() {
        let spec = DilatedTcnSpec::new(3, 5, 2, 3);
        assert_eq!(spec.dilations(), vec![1, 2, 4, 1, 2, 4]);
    }

    #[test]
    fn validation_rejects_degenerate_specs() {
        let mut spec = EdTcnSpec::new(3, 5, 2, 5);
        spec.filter_duration = 0;
        assert!(spec.validate().is_err());
        let mut spec = EdTcnSpec::new(3, 5, 2, 5);
        spec.filters = vec![16];
        assert!(spec.validate().is_err());
        let mut spec = DilatedTcnSpec::new(3, 5, 2, 3);
        spec.num_blocks = 0;
        assert!(spec.validate().is_err());
    }
}
