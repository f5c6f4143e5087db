//! Neural-network primitives on per-frame feature sequences.
//!
//! Every operation here has an explicit forward pass and a hand-written
//! backward pass; the test suite checks each backward against central finite
//! differences. All arithmetic is `f64`.

pub mod act;
pub mod adam;
pub mod conv;
pub mod dense;
pub mod dropout;
pub mod init;
pub mod loss;
pub mod pool;
pub mod tensor;

pub use act::{activation_backward, activation_forward, Activation};
pub use adam::{adam_step, AdamConfig, AdamState};
pub use conv::{temporal_conv_backward, temporal_conv_forward, ConvFilterBank, ConvMode};
pub use dense::{dense_backward, dense_forward, DenseLayer};
pub use dropout::{dropout_backward, spatial_dropout, DropoutMask};
pub use init::glorot_uniform;
pub use loss::{cross_entropy, softmax_frames};
pub use pool::{
    max_pool_time, max_pool_time_backward, upsample_time, upsample_time_backward, PoolIndices,
};
pub use tensor::SeqTensor;
