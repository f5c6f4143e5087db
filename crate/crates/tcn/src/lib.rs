//! Temporal convolutional networks for frame-wise action segmentation.
//!
//! Two architectures over per-frame feature sequences:
//!
//! * an encoder-decoder TCN (temporal convolution + pooling encoder, an
//!   upsampling + convolution decoder, per-frame softmax head), and
//! * a dilated TCN (stacked residual blocks of two-tap dilated causal
//!   convolutions with gated activations and skip connections).
//!
//! Everything is built from scratch on flat `f64` buffers: forward passes,
//!   manual backward passes, Adam, Glorot init, spatial (whole-channel)
//! dropout. Training is deterministic given a seed.
//!
//! Around the models: segmentation metrics (frame accuracy, segmental edit
//! score, F1@k, mAP), synthetic benchmark generators, dataset/model file
//! formats, an SVG/ASCII timeline renderer, and the `tcn` command-line tool.
//!
//! Start with the `examples/` directory; each example exercises one major
//! capability end to end.

pub mod cli;
pub mod error;
pub mod io;
pub mod metrics;
pub mod models;
pub mod nn;
pub mod synth;
pub mod timeline;

pub use error::{Result, TcnError};
pub use nn::tensor::SeqTensor;

/// Per-frame integer class labels for one sequence.
pub type LabelSequence = Vec<usize>;

/// One labelled sequence: features (F x T) plus per-frame labels (length T).
pub type LabelledSequence = (SeqTensor, LabelSequence);
