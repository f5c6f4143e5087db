//! Dilated temporal network: a per-frame input projection feeds a stack of
//! residual layers whose dilation doubles within each block ([1, 2, 4, ...],
//! restarting every block). A layer convolves its input at offsets
//! {-s, 0} (causal) or {-s, 0, +s} (acausal), applies the configured
//! activation and spatial dropout, and adds a per-frame linear map of the
//! result back onto its input. Block outputs are summed into a skip path,
//! and two ReLU stages plus a linear head turn that sum into class scores.

use super::model::{apply_dropout, DilatedLayerParams, GradBuffer};
use super::DilatedTcnSpec;
use crate::error::Result;
use crate::nn::{
    activation_backward, activation_forward, dense_backward, dense_forward, dropout_backward,
    temporal_conv_backward, temporal_conv_forward, ConvMode, DenseLayer, DropoutMask, SeqTensor,
};
use rand_chacha::ChaCha8Rng;

/// Forward tape: everything the backward pass replays.
pub(crate) struct Forward {
    pub input: SeqTensor,
    pub layer_inputs: Vec<SeqTensor>,
    pub layer_preacts: Vec<SeqTensor>,
    /// Post-dropout activations; input of each layer's residual projection.
    pub layer_dropped: Vec<SeqTensor>,
    pub layer_masks: Vec<DropoutMask>,
    /// Sum of block outputs, before the first ReLU.
    pub skip_pre: SeqTensor,
    pub z0: SeqTensor,
    pub z1_pre: SeqTensor,
    pub z1: SeqTensor,
    pub logits: SeqTensor,
}

fn conv_mode(spec: &DilatedTcnSpec) -> ConvMode {
    if spec.causal {
        ConvMode::Causal
    } else {
        ConvMode::Acausal
    }
}

fn relu(x: &SeqTensor) -> SeqTensor {
    let mut out = x.clone();
    for v in out.as_mut_slice() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    out
}

/// dL/dx for y = relu(x), given x and dL/dy.
fn relu_backward(preact: &SeqTensor, upstream: &SeqTensor) -> SeqTensor {
    let mut out = upstream.clone();
    for (g, &x) in out.as_mut_slice().iter_mut().zip(preact.as_slice()) {
        if x <= 0.0 {
            *g = 0.0;
        }
    }
    out
}

fn add_into(acc: &mut SeqTensor, x: &SeqTensor) {
    for (a, b) in acc.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *a += b;
    }
}

pub(crate) fn forward(
    spec: &DilatedTcnSpec,
    proj: &DenseLayer,
    layers: &[DilatedLayerParams],
    mix: &DenseLayer,
    head: &DenseLayer,
    input: &SeqTensor,
    mut dropout: Option<(f64, &mut ChaCha8Rng)>,
) -> Result<Forward> {
    let mode = conv_mode(spec);
    let per_block = spec.layers_per_block;
    let n = layers.len();

    let mut layer_inputs = Vec::with_capacity(n);
    let mut layer_preacts = Vec::with_capacity(n);
    let mut layer_dropped = Vec::with_capacity(n);
    let mut layer_masks = Vec::with_capacity(n);

    let mut s = dense_forward(input, proj)?;
    let mut skip_pre = SeqTensor::zeros(spec.num_filters, input.frames());
    for (i, layer) in layers.iter().enumerate() {
        let preact = temporal_conv_forward(&s, &layer.conv, mode, layer.dilation)?;
        let hidden = activation_forward(&preact, spec.activation)?;
        let (dropped, mask) = apply_dropout(&hidden, &mut dropout)?;
        let update = dense_forward(&dropped, &layer.residual)?;
        let mut out = s.clone();
        add_into(&mut out, &update);

        layer_inputs.push(s);
        layer_preacts.push(preact);
        layer_dropped.push(dropped);
        layer_masks.push(mask);
        s = out;
        if (i + 1) % per_block == 0 {
            add_into(&mut skip_pre, &s);
        }
    }

    let z0 = relu(&skip_pre);
    let z1_pre = dense_forward(&z0, mix)?;
    let z1 = relu(&z1_pre);
    let logits = dense_forward(&z1, head)?;
    Ok(Forward {
        input: input.clone(),
        layer_inputs,
        layer_preacts,
        layer_dropped,
        layer_masks,
        skip_pre,
        z0,
        z1_pre,
        z1,
        logits,
    })
}

/// Backward pass from a logit-space gradient. Returns the input gradient
/// and parameter gradients in canonical order (projection, layer quads,
/// mix, head).
pub(crate) fn backward(
    spec: &DilatedTcnSpec,
    proj: &DenseLayer,
    layers: &[DilatedLayerParams],
    mix: &DenseLayer,
    head: &DenseLayer,
    fwd: &Forward,
    d_logits: &SeqTensor,
) -> Result<(SeqTensor, GradBuffer)> {
    let mode = conv_mode(spec);
    let per_block = spec.layers_per_block;
    let n = layers.len();
    let mut groups: Vec<Vec<f64>> = vec![Vec::new(); 4 * n + 6];

    let (d_z1, d_head_w, d_head_b) = dense_backward(&fwd.z1, head, d_logits)?;
    groups[4 * n + 4] = d_head_w;
    groups[4 * n + 5] = d_head_b;

    let d_z1_pre = relu_backward(&fwd.z1_pre, &d_z1);
    let (d_z0, d_mix_w, d_mix_b) = dense_backward(&fwd.z0, mix, &d_z1_pre)?;
    groups[4 * n + 2] = d_mix_w;
    groups[4 * n + 3] = d_mix_b;

    // Gradient arriving at every block's output through the skip sum.
    let d_skip = relu_backward(&fwd.skip_pre, &d_z0);

    let mut d_s = SeqTensor::zeros(spec.num_filters, fwd.input.frames());
    for (i, layer) in layers.iter().enumerate().rev() {
        if (i + 1) % per_block == 0 {
            add_into(&mut d_s, &d_skip);
        }
        let (d_dropped, d_res_w, d_res_b) =
            dense_backward(&fwd.layer_dropped[i], &layer.residual, &d_s)?;
        let d_hidden = dropout_backward(&d_dropped, &fwd.layer_masks[i])?;
        let d_preact = activation_backward(&fwd.layer_preacts[i], &d_hidden, spec.activation)?;
        let (d_conv_in, d_w, d_b) = temporal_conv_backward(
            &fwd.layer_inputs[i],
            &layer.conv,
            mode,
            layer.dilation,
            &d_preact,
        )?;
        groups[2 + 4 * i] = d_w;
        groups[2 + 4 * i + 1] = d_b;
        groups[2 + 4 * i + 2] = d_res_w;
        groups[2 + 4 * i + 3] = d_res_b;
        // The layer input feeds both the identity path and the convolution.
        add_into(&mut d_s, &d_conv_in);
    }

    let (d_input, d_proj_w, d_proj_b) = dense_backward(&fwd.input, proj, &d_s)?;
    groups[0] = d_proj_w;
    groups[1] = d_proj_b;
    Ok((d_input, GradBuffer { groups }))
}
