//! Encoder-decoder temporal network: each encoder level is a temporal
//! convolution, activation, spatial dropout and width-2 max pool; each
//! decoder level mirrors it with a nearest-neighbor upsample in place of the
//! pool, and a per-frame linear head produces class scores.
//!
//! In causal mode every pooled frame summarizes one step of lookahead, so
//! the decoder shifts each upsampled sequence right by one frame (zero
//! filled). The composite network then never reads future frames.

use super::model::{apply_dropout, GradBuffer};
use super::EdTcnSpec;
use crate::error::Result;
use crate::nn::{
    activation_backward, activation_forward, dense_backward, dense_forward, dropout_backward,
    max_pool_time, max_pool_time_backward, temporal_conv_backward, temporal_conv_forward,
    upsample_time, upsample_time_backward, ConvFilterBank, ConvMode, DenseLayer, DropoutMask,
    PoolIndices, SeqTensor,
};
use rand_chacha::ChaCha8Rng;

/// Forward tape: everything the backward pass replays.
pub(crate) struct Forward {
    pub enc_inputs: Vec<SeqTensor>,
    pub enc_preacts: Vec<SeqTensor>,
    pub enc_masks: Vec<DropoutMask>,
    pub pools: Vec<PoolIndices>,
    /// Frame counts by depth: `lens[0]` is the input length, `lens[l]` the
    /// length after `l` pools.
    pub lens: Vec<usize>,
    pub dec_inputs: Vec<SeqTensor>,
    pub dec_preacts: Vec<SeqTensor>,
    pub dec_masks: Vec<DropoutMask>,
    pub head_input: SeqTensor,
    pub logits: SeqTensor,
}

fn conv_mode(spec: &EdTcnSpec) -> ConvMode {
    if spec.causal {
        ConvMode::Causal
    } else {
        ConvMode::Acausal
    }
}

pub(crate) fn forward(
    spec: &EdTcnSpec,
    enc: &[ConvFilterBank],
    dec: &[ConvFilterBank],
    head: &DenseLayer,
    input: &SeqTensor,
    mut dropout: Option<(f64, &mut ChaCha8Rng)>,
) -> Result<Forward> {
    let mode = conv_mode(spec);
    let levels = spec.num_layers;

    let mut enc_inputs = Vec::with_capacity(levels);
    let mut enc_preacts = Vec::with_capacity(levels);
    let mut enc_masks = Vec::with_capacity(levels);
    let mut pools = Vec::with_capacity(levels);
    let mut lens = Vec::with_capacity(levels + 1);
    lens.push(input.frames());

    let mut x = input.clone();
    for bank in enc {
        let preact = temporal_conv_forward(&x, bank, mode, 1)?;
        let hidden = activation_forward(&preact, spec.activation)?;
        let (dropped, mask) = apply_dropout(&hidden, &mut dropout)?;
        let (pooled, indices) = max_pool_time(&dropped)?;
        lens.push(pooled.frames());
        enc_inputs.push(x);
        enc_preacts.push(preact);
        enc_masks.push(mask);
        pools.push(indices);
        x = pooled;
    }

    let mut dec_inputs = Vec::with_capacity(levels);
    let mut dec_preacts = Vec::with_capacity(levels);
    let mut dec_masks = Vec::with_capacity(levels);
    for (i, bank) in dec.iter().enumerate() {
        let mut up = upsample_time(&x, lens[levels - 1 - i])?;
        if spec.causal {
            up = shift_right_one(&up);
        }
        let preact = temporal_conv_forward(&up, bank, mode, 1)?;
        let hidden = activation_forward(&preact, spec.activation)?;
        let (dropped, mask) = apply_dropout(&hidden, &mut dropout)?;
        dec_inputs.push(up);
        dec_preacts.push(preact);
        dec_masks.push(mask);
        x = dropped;
    }

    let logits = dense_forward(&x, head)?;
    Ok(Forward {
        enc_inputs,
        enc_preacts,
        enc_masks,
        pools,
        lens,
        dec_inputs,
        dec_preacts,
        dec_masks,
        head_input: x,
        logits,
    })
}

/// Backward pass from a logit-space gradient. Returns the input gradient
/// and parameter gradients in canonical order (encoder pairs, decoder pairs
/// deepest first, head).
pub(crate) fn backward(
    spec: &EdTcnSpec,
    enc: &[ConvFilterBank],
    dec: &[ConvFilterBank],
    head: &DenseLayer,
    fwd: &Forward,
    d_logits: &SeqTensor,
) -> Result<(SeqTensor, GradBuffer)> {
    let mode = conv_mode(spec);
    let levels = spec.num_layers;
    let mut groups: Vec<Vec<f64>> = vec![Vec::new(); 4 * levels + 2];

    let (mut d, d_head_w, d_head_b) = dense_backward(&fwd.head_input, head, d_logits)?;
    groups[4 * levels] = d_head_w;
    groups[4 * levels + 1] = d_head_b;

    for i in (0..levels).rev() {
        let d_hidden = dropout_backward(&d, &fwd.dec_masks[i])?;
        let d_preact = activation_backward(&fwd.dec_preacts[i], &d_hidden, spec.activation)?;
        let (mut d_up, d_w, d_b) =
            temporal_conv_backward(&fwd.dec_inputs[i], &dec[i], mode, 1, &d_preact)?;
        groups[2 * levels + 2 * i] = d_w;
        groups[2 * levels + 2 * i + 1] = d_b;
        if spec.causal {
            d_up = shift_right_one_backward(&d_up);
        }
        d = upsample_time_backward(&d_up, fwd.lens[levels - i])?;
    }

    for l in (0..levels).rev() {
        let d_dropped = max_pool_time_backward(&fwd.pools[l], &d)?;
        let d_hidden = dropout_backward(&d_dropped, &fwd.enc_masks[l])?;
        let d_preact = activation_backward(&fwd.enc_preacts[l], &d_hidden, spec.activation)?;
        let (d_x, d_w, d_b) =
            temporal_conv_backward(&fwd.enc_inputs[l], &enc[l], mode, 1, &d_preact)?;
        groups[2 * l] = d_w;
        groups[2 * l + 1] = d_b;
        d = d_x;
    }

    Ok((d, GradBuffer { groups }))
}

/// Delays a sequence by one frame; frame 0 becomes zero.
fn shift_right_one(x: &SeqTensor) -> SeqTensor {
    let frames = x.frames();
    let mut out = SeqTensor::zeros(x.channels(), frames);
    for c in 0..x.channels() {
        let src = x.row(c);
        out.row_mut(c)[1..].copy_from_slice(&src[..frames - 1]);
    }
    out
}

fn shift_right_one_backward(upstream: &SeqTensor) -> SeqTensor {
    let frames = upstream.frames();
    let mut out = SeqTensor::zeros(upstream.channels(), frames);
    for c in 0..upstream.channels() {
        let src = upstream.row(c);
        out.row_mut(c)[..frames - 1].copy_from_slice(&src[1..]);
    }
    out
}
