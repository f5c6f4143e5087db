//! Model container: parameters, deterministic construction, parameter
//! walking (one canonical order shared by the optimizer, gradient buffers
//! and the file format), and inference entry points.

use super::{dilated, ed_tcn, ModelSpec};
use crate::error::{Result, TcnError};
use crate::nn::{
    cross_entropy, glorot_uniform, softmax_frames, ConvFilterBank, DenseLayer, SeqTensor,
};
use crate::LabelSequence;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Bookkeeping carried in the model file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainMeta {
    pub epochs_trained: u32,
    /// Seed of the most recent training run (build seed until trained).
    pub seed: u64,
    /// Mean training loss per epoch.
    pub loss_curve: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DilatedLayerParams {
    pub conv: ConvFilterBank,
    pub residual: DenseLayer,
    pub dilation: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum ModelParams {
    EdTcn {
        enc: Vec<ConvFilterBank>,
        /// Stored outermost-last: `dec[0]` mirrors the deepest encoder layer.
        dec: Vec<ConvFilterBank>,
        head: DenseLayer,
    },
    Dilated {
        proj: DenseLayer,
        layers: Vec<DilatedLayerParams>,
        mix: DenseLayer,
        head: DenseLayer,
    },
}

/// Per-parameter-group gradients, parallel to the model's canonical
/// parameter order. Groups start zeroed.
#[derive(Debug, Clone)]
pub struct GradBuffer {
    pub groups: Vec<Vec<f64>>,
}

impl GradBuffer {
    pub fn zeros_like(model: &TcnModel) -> Self {
        GradBuffer {
            groups: model
                .param_group_lens()
                .into_iter()
                .map(|n| vec![0.0; n])
                .collect(),
        }
    }

    pub fn zero(&mut self) {
        for g in &mut self.groups {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TcnModel {
    pub spec: ModelSpec,
    pub meta: TrainMeta,
    pub(crate) params: ModelParams,
}

impl TcnModel {
    /// Builds a model with Glorot-uniform weights and zero biases, drawn in
    /// canonical parameter order from a ChaCha8 stream seeded with `seed`.
    /// Stored values are rounded through f32 so serialization is lossless.
    pub fn build(spec: ModelSpec, seed: u64) -> Result<TcnModel> {
        spec.validate()?;
        let params = allocate(&spec);
        let mut model = TcnModel {
            spec,
            meta: TrainMeta {
                seed,
                ..TrainMeta::default()
            },
            params,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        model.visit_params_mut(&mut |name, shape, values| {
            if name.ends_with(".weight") {
                let (fan_in, fan_out) = fans(shape);
                values.copy_from_slice(&glorot_uniform(&mut rng, fan_in, fan_out, values.len()));
            }
            // Biases stay zero.
        });
        model.quantize_params_f32();
        Ok(model)
    }

    /// Structure-only model (all parameters zero); used by the file reader.
    pub(crate) fn allocate_zeroed(spec: ModelSpec) -> Result<TcnModel> {
        spec.validate()?;
        let params = allocate(&spec);
        Ok(TcnModel {
            spec,
            meta: TrainMeta::default(),
            params,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim()
    }

    pub fn num_classes(&self) -> usize {
        self.spec.num_classes()
    }

    pub fn receptive_field(&self) -> usize {
        self.spec.receptive_field()
    }

    /// Class probabilities (num_classes x T), dropout disabled.
    pub fn forward(&self, input: &SeqTensor) -> Result<SeqTensor> {
        softmax_frames(&self.logits(input)?)
    }

    /// Pre-softmax scores (num_classes x T), dropout disabled.
    pub fn logits(&self, input: &SeqTensor) -> Result<SeqTensor> {
        self.check_input(input)?;
        match (&self.spec, &self.params) {
            (ModelSpec::EdTcn(spec), ModelParams::EdTcn { enc, dec, head }) => {
                Ok(ed_tcn::forward(spec, enc, dec, head, input, None)?.logits)
            }
            (
                ModelSpec::Dilated(spec),
                ModelParams::Dilated {
                    proj,
                    layers,
                    mix,
                    head,
                },
            ) => Ok(dilated::forward(spec, proj, layers, mix, head, input, None)?.logits),
            _ => unreachable!("spec/params variants always match"),
        }
    }

    /// Per-frame argmax labels; ties resolve to the lowest class id.
    pub fn predict_labels(&self, input: &SeqTensor) -> Result<LabelSequence> {
        let probs = self.forward(input)?;
        let mut out = Vec::with_capacity(probs.frames());
        for t in 0..probs.frames() {
            let mut best = 0usize;
            for c in 1..probs.channels() {
                if probs.at(c, t) > probs.at(best, t) {
                    best = c;
                }
            }
            out.push(best);
        }
        Ok(out)
    }

    /// Gradient of `sum(upstream * logits)` with respect to the input, with
    /// dropout disabled. Drives the receptive-field probes.
    pub fn input_gradient(&self, input: &SeqTensor, upstream: &SeqTensor) -> Result<SeqTensor> {
        self.check_input(input)?;
        if upstream.channels() != self.num_classes() || upstream.frames() != input.frames() {
            return Err(TcnError::config(format!(
                "upstream gradient is {}x{}, expected {}x{}",
                upstream.channels(),
                upstream.frames(),
                self.num_classes(),
                input.frames()
            )));
        }
        let (d_input, _) = self.backward_from_logits(input, upstream, None)?;
        Ok(d_input)
    }

    /// Mean cross-entropy loss on one labelled sequence plus its gradient
    /// for every parameter tensor, in `visit_params` order. Dropout is
    /// disabled, so the result is a deterministic function of the inputs.
    /// This is the hook for custom training loops and for checking the
    /// backward pass against finite differences.
    pub fn loss_gradients(
        &self,
        input: &SeqTensor,
        labels: &LabelSequence,
    ) -> Result<(f64, GradBuffer)> {
        let pass = self.forward_training(input, None)?;
        let probs = softmax_frames(pass.logits())?;
        let (loss, d_logits) = cross_entropy(&probs, labels, None)?;
        let grads = self.backward_training(&pass, &d_logits)?;
        Ok((loss, grads))
    }

    /// Forward (with optional dropout) + backward from a logit-space
    /// gradient. Returns the input gradient and parameter gradients in
    /// canonical order. `dropout` is `(rate, rng)`.
    pub(crate) fn backward_from_logits(
        &self,
        input: &SeqTensor,
        d_logits_of: &SeqTensor,
        dropout: Option<(f64, &mut ChaCha8Rng)>,
    ) -> Result<(SeqTensor, GradBuffer)> {
        match (&self.spec, &self.params) {
            (ModelSpec::EdTcn(spec), ModelParams::EdTcn { enc, dec, head }) => {
                let fwd = ed_tcn::forward(spec, enc, dec, head, input, dropout)?;
                ed_tcn::backward(spec, enc, dec, head, &fwd, d_logits_of)
            }
            (
                ModelSpec::Dilated(spec),
                ModelParams::Dilated {
                    proj,
                    layers,
                    mix,
                    head,
                },
            ) => {
                let fwd = dilated::forward(spec, proj, layers, mix, head, input, dropout)?;
                dilated::backward(spec, proj, layers, mix, head, &fwd, d_logits_of)
            }
            _ => unreachable!("spec/params variants always match"),
        }
    }

    /// Forward pass for training: returns logits and an opaque tape.
    pub(crate) fn forward_training(
        &self,
        input: &SeqTensor,
        dropout: Option<(f64, &mut ChaCha8Rng)>,
    ) -> Result<TrainingPass> {
        self.check_input(input)?;
        match (&self.spec, &self.params) {
            (ModelSpec::EdTcn(spec), ModelParams::EdTcn { enc, dec, head }) => Ok(
                TrainingPass::EdTcn(ed_tcn::forward(spec, enc, dec, head, input, dropout)?),
            ),
            (
                ModelSpec::Dilated(spec),
                ModelParams::Dilated {
                    proj,
                    layers,
                    mix,
                    head,
                },
            ) => Ok(TrainingPass::Dilated(dilated::forward(
                spec, proj, layers, mix, head, input, dropout,
            )?)),
            _ => unreachable!("spec/params variants always match"),
        }
    }

    pub(crate) fn backward_training(
        &self,
        pass: &TrainingPass,
        d_logits: &SeqTensor,
    ) -> Result<GradBuffer> {
        let (_, grads) = match (&self.spec, &self.params, pass) {
            (
                ModelSpec::EdTcn(spec),
                ModelParams::EdTcn { enc, dec, head },
                TrainingPass::EdTcn(fwd),
            ) => ed_tcn::backward(spec, enc, dec, head, fwd, d_logits)?,
            (
                ModelSpec::Dilated(spec),
                ModelParams::Dilated {
                    proj,
                    layers,
                    mix,
                    head,
                },
                TrainingPass::Dilated(fwd),
            ) => dilated::backward(spec, proj, layers, mix, head, fwd, d_logits)?,
            _ => unreachable!("spec/params variants always match"),
        };
        Ok(grads)
    }

    fn check_input(&self, input: &SeqTensor) -> Result<()> {
        if input.channels() != self.input_dim() {
            return Err(TcnError::config(format!(
                "model expects {} feature channels, got {}",
                self.input_dim(),
                input.channels()
            )));
        }
        if input.frames() == 0 {
            return Err(TcnError::data("cannot run on an empty sequence"));
        }
        Ok(())
    }

    /// Visits every parameter tensor (name, shape, values) in canonical
    /// order: encoder-to-head for the encoder-decoder model;
    /// projection, blocks, mix, head for the dilated model.
    pub fn visit_params(&self, f: &mut ParamVisitor) {
        walk(&self.params, &mut |name, shape, values| {
            f(name, shape, values)
        });
    }

    pub fn visit_params_mut(&mut self, f: &mut ParamVisitorMut) {
        walk_mut(&mut self.params, f);
    }

    /// Tensor names and shapes, in canonical order.
    pub fn param_summary(&self) -> Vec<(String, Vec<usize>)> {
        let mut out = Vec::new();
        self.visit_params(&mut |name, shape, _| out.push((name.to_string(), shape.to_vec())));
        out
    }

    pub fn param_group_lens(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.visit_params(&mut |_, _, values| out.push(values.len()));
        out
    }

    pub fn num_params(&self) -> usize {
        self.param_group_lens().iter().sum()
    }

    /// Mutable slices over every parameter group, canonical order.
    pub(crate) fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        slices_mut(&mut self.params)
    }

    /// Rounds every parameter through f32 so the on-disk f32 blobs represent
    /// the in-memory values exactly.
    pub fn quantize_params_f32(&mut self) {
        self.visit_params_mut(&mut |_, _, values| {
            for v in values.iter_mut() {
                *v = *v as f32 as f64;
            }
        });
    }
}

/// Applies spatial dropout when a `(rate, rng)` pair is supplied, otherwise
/// passes the tensor through untouched (no RNG draws).
pub(crate) fn apply_dropout(
    x: &SeqTensor,
    dropout: &mut Option<(f64, &mut ChaCha8Rng)>,
) -> Result<(SeqTensor, crate::nn::DropoutMask)> {
    match dropout.as_mut() {
        Some((rate, rng)) => crate::nn::spatial_dropout(x, *rate, rng, true),
        None => Ok((
            x.clone(),
            crate::nn::DropoutMask {
                kept: None,
                rate: 0.0,
            },
        )),
    }
}

/// Opaque forward tape handed back to `backward_training`.
pub(crate) enum TrainingPass {
    EdTcn(ed_tcn::Forward),
    Dilated(dilated::Forward),
}

impl TrainingPass {
    pub fn logits(&self) -> &SeqTensor {
        match self {
            TrainingPass::EdTcn(f) => &f.logits,
            TrainingPass::Dilated(f) => &f.logits,
        }
    }
}

fn fans(shape: &[usize]) -> (usize, usize) {
    match shape {
        // Conv banks: [out, in, taps].
        [out, inp, taps] => (inp * taps, out * taps),
        // Dense: [out, in].
        [out, inp] => (*inp, *out),
        _ => (1, 1),
    }
}

fn allocate(spec: &ModelSpec) -> ModelParams {
    match spec {
        ModelSpec::EdTcn(s) => {
            let mut enc = Vec::with_capacity(s.num_layers);
            let mut width = s.input_dim;
            for &f in &s.filters {
                enc.push(ConvFilterBank::zeros(
                    s.activation.conv_channels(f),
                    width,
                    s.filter_duration,
                ));
                width = f;
            }
            // Decoder mirrors the encoder: dec[i] re-creates the filter
            // count of encoder level L-i.
            let mut dec = Vec::with_capacity(s.num_layers);
            for i in 0..s.num_layers {
                let filters = s.filters[s.num_layers - 1 - i];
                dec.push(ConvFilterBank::zeros(
                    s.activation.conv_channels(filters),
                    width,
                    s.filter_duration,
                ));
                width = filters;
            }
            ModelParams::EdTcn {
                enc,
                dec,
                head: DenseLayer::zeros(s.num_classes, s.filters[0]),
            }
        }
        ModelSpec::Dilated(s) => {
            let taps = if s.causal { 2 } else { 3 };
            let layers = s
                .dilations()
                .into_iter()
                .map(|dilation| DilatedLayerParams {
                    conv: ConvFilterBank::zeros(
                        s.activation.conv_channels(s.num_filters),
                        s.num_filters,
                        taps,
                    ),
                    residual: DenseLayer::zeros(s.num_filters, s.num_filters),
                    dilation,
                })
                .collect();
            ModelParams::Dilated {
                proj: DenseLayer::zeros(s.num_filters, s.input_dim),
                layers,
                mix: DenseLayer::zeros(s.num_filters, s.num_filters),
                head: DenseLayer::zeros(s.num_classes, s.num_filters),
            }
        }
    }
}

/// Parameter visitor: called once per tensor with (name, shape, values).
pub type ParamVisitor<'a> = dyn FnMut(&str, &[usize], &[f64]) + 'a;
pub type ParamVisitorMut<'a> = dyn FnMut(&str, &[usize], &mut [f64]) + 'a;

fn conv_shape(c: &ConvFilterBank) -> Vec<usize> {
    vec![c.out_channels, c.in_channels, c.taps]
}

fn dense_shape(d: &DenseLayer) -> Vec<usize> {
    vec![d.out_dim, d.in_dim]
}

fn walk(params: &ModelParams, f: &mut ParamVisitor) {
    match params {
        ModelParams::EdTcn { enc, dec, head } => {
            for (l, bank) in enc.iter().enumerate() {
                f(
                    &format!("enc{}.conv.weight", l + 1),
                    &conv_shape(bank),
                    &bank.weights,
                );
                f(
                    &format!("enc{}.conv.bias", l + 1),
                    &[bank.out_channels],
                    &bank.bias,
                );
            }
            let levels = dec.len();
            for (i, bank) in dec.iter().enumerate() {
                let level = levels - i;
                f(
                    &format!("dec{level}.conv.weight"),
                    &conv_shape(bank),
                    &bank.weights,
                );
                f(
                    &format!("dec{level}.conv.bias"),
                    &[bank.out_channels],
                    &bank.bias,
                );
            }
            f("head.weight", &dense_shape(head), &head.weights);
            f("head.bias", &[head.out_dim], &head.bias);
        }
        ModelParams::Dilated {
            proj,
            layers,
            mix,
            head,
        } => {
            f("proj.weight", &dense_shape(proj), &proj.weights);
            f("proj.bias", &[proj.out_dim], &proj.bias);
            let per_block = block_len(layers);
            for (i, layer) in layers.iter().enumerate() {
                let (j, l) = (i / per_block + 1, i % per_block + 1);
                let p = format!("block{j}.layer{l}");
                f(
                    &format!("{p}.conv.weight"),
                    &conv_shape(&layer.conv),
                    &layer.conv.weights,
                );
                f(
                    &format!("{p}.conv.bias"),
                    &[layer.conv.out_channels],
                    &layer.conv.bias,
                );
                f(
                    &format!("{p}.residual.weight"),
                    &dense_shape(&layer.residual),
                    &layer.residual.weights,
                );
                f(
                    &format!("{p}.residual.bias"),
                    &[layer.residual.out_dim],
                    &layer.residual.bias,
                );
            }
            f("mix.weight", &dense_shape(mix), &mix.weights);
            f("mix.bias", &[mix.out_dim], &mix.bias);
            f("head.weight", &dense_shape(head), &head.weights);
            f("head.bias", &[head.out_dim], &head.bias);
        }
    }
}

fn walk_mut(params: &mut ModelParams, f: &mut ParamVisitorMut) {
    match params {
        ModelParams::EdTcn { enc, dec, head } => {
            for (l, bank) in enc.iter_mut().enumerate() {
                let shape = conv_shape(bank);
                f(
                    &format!("enc{}.conv.weight", l + 1),
                    &shape,
                    &mut bank.weights,
                );
                f(
                    &format!("enc{}.conv.bias", l + 1),
                    &[bank.out_channels],
                    &mut bank.bias,
                );
            }
            let levels = dec.len();
            for (i, bank) in dec.iter_mut().enumerate() {
                let level = levels - i;
                let shape = conv_shape(bank);
                f(
                    &format!("dec{level}.conv.weight"),
                    &shape,
                    &mut bank.weights,
                );
                f(
                    &format!("dec{level}.conv.bias"),
                    &[bank.out_channels],
                    &mut bank.bias,
                );
            }
            f("head.weight", &dense_shape(head), &mut head.weights);
            f("head.bias", &[head.out_dim], &mut head.bias);
        }
        ModelParams::Dilated {
            proj,
            layers,
            mix,
            head,
        } => {
            f("proj.weight", &dense_shape(proj), &mut proj.weights);
            f("proj.bias", &[proj.out_dim], &mut proj.bias);
            let per_block = block_len(layers);
            for (i, layer) in layers.iter_mut().enumerate() {
                let (j, l) = (i / per_block + 1, i % per_block + 1);
                let p = format!("block{j}.layer{l}");
                let cshape = conv_shape(&layer.conv);
                f(
                    &format!("{p}.conv.weight"),
                    &cshape,
                    &mut layer.conv.weights,
                );
                f(
                    &format!("{p}.conv.bias"),
                    &[layer.conv.out_channels],
                    &mut layer.conv.bias,
                );
                let rshape = dense_shape(&layer.residual);
                f(
                    &format!("{p}.residual.weight"),
                    &rshape,
                    &mut layer.residual.weights,
                );
                f(
                    &format!("{p}.residual.bias"),
                    &[layer.residual.out_dim],
                    &mut layer.residual.bias,
                );
            }
            f("mix.weight", &dense_shape(mix), &mut mix.weights);
            f("mix.bias", &[mix.out_dim], &mut mix.bias);
            f("head.weight", &dense_shape(head), &mut head.weights);
            f("head.bias", &[head.out_dim], &mut head.bias);
        }
    }
}

/// Layers per block, recovered from the flat layer list via dilation resets.
fn block_len(layers: &[DilatedLayerParams]) -> usize {
    layers
        .iter()
        .skip(1)
        .position(|l| l.dilation == 1)
        .map(|p| p + 1)
        .unwrap_or(layers.len())
}

fn slices_mut(params: &mut ModelParams) -> Vec<&mut [f64]> {
    let mut out: Vec<&mut [f64]> = Vec::new();
    match params {
        ModelParams::EdTcn { enc, dec, head } => {
            for bank in enc.iter_mut() {
                out.push(&mut bank.weights);
                out.push(&mut bank.bias);
            }
            for bank in dec.iter_mut() {
                out.push(&mut bank.weights);
                out.push(&mut bank.bias);
            }
            out.push(&mut head.weights);
            out.push(&mut head.bias);
        }
        ModelParams::Dilated {
            proj,
            layers,
            mix,
            head,
        } => {
            out.push(&mut proj.weights);
            out.push(&mut proj.bias);
            for layer in layers.iter_mut() {
                out.push(&mut layer.conv.weights);
                out.push(&mut layer.conv.bias);
                out.push(&mut layer.residual.weights);
                out.push(&mut layer.residual.bias);
            }
            out.push(&mut mix.weights);
            out.push(&mut mix.bias);
            out.push(&mut head.weights);
            out.push(&mut head.bias);
        }
    }
    out
}
