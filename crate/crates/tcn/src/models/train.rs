//! Sequence-level training loop: cross-entropy on per-frame class
//! probabilities, one Adam step per sequence, optional per-epoch shuffling.
//! Every random draw (shuffle order, dropout masks) comes from one ChaCha8
//! stream seeded by the config, so runs are bit-for-bit reproducible.

use super::model::TcnModel;
use crate::error::{Result, TcnError};
use crate::nn::{adam_step, cross_entropy, softmax_frames, AdamConfig, AdamState};
use crate::LabelledSequence;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: u32,
    pub learning_rate: f64,
    /// Spatial dropout rate applied after every convolution activation.
    pub dropout: f64,
    pub seed: u64,
    /// Reshuffle the sequence order every epoch.
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            learning_rate: 1e-3,
            dropout: 0.3,
            seed: 0,
            shuffle: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean per-sequence training loss, one entry per epoch.
    pub loss_curve: Vec<f64>,
    pub sequences: usize,
}

pub fn train(
    model: &mut TcnModel,
    data: &[LabelledSequence],
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    if data.is_empty() {
        return Err(TcnError::data("training set is empty"));
    }
    if !(cfg.learning_rate.is_finite() && cfg.learning_rate > 0.0) {
        return Err(TcnError::config(format!(
            "learning rate must be a positive number, got {}",
            cfg.learning_rate
        )));
    }
    if !(0.0..1.0).contains(&cfg.dropout) {
        return Err(TcnError::config(format!(
            "dropout rate must be in [0, 1), got {}",
            cfg.dropout
        )));
    }
    for (i, (x, y)) in data.iter().enumerate() {
        if x.channels() != model.input_dim() {
            return Err(TcnError::data(format!(
                "sequence {i} has {} feature channels, model expects {}",
                x.channels(),
                model.input_dim()
            )));
        }
        if x.frames() == 0 || x.frames() != y.len() {
            return Err(TcnError::data(format!(
                "sequence {i} has {} frames but {} labels",
                x.frames(),
                y.len()
            )));
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= model.num_classes()) {
            return Err(TcnError::data(format!(
                "sequence {i} contains label {bad}, model has {} classes",
                model.num_classes()
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = AdamState::new(
        &model.param_group_lens(),
        AdamConfig {
            step_size: cfg.learning_rate,
            ..AdamConfig::default()
        },
    );
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut loss_curve = Vec::with_capacity(cfg.epochs as usize);

    for _ in 0..cfg.epochs {
        if cfg.shuffle {
            order.shuffle(&mut rng);
        }
        let mut epoch_loss = 0.0;
        for &idx in &order {
            let (x, y) = &data[idx];
            let dropout = if cfg.dropout > 0.0 {
                Some((cfg.dropout, &mut rng))
            } else {
                None
            };
            let pass = model.forward_training(x, dropout)?;
            let probs = softmax_frames(pass.logits())?;
            let (loss, d_logits) = cross_entropy(&probs, y, None)?;
            let grads = model.backward_training(&pass, &d_logits)?;
            {
                let mut params = model.param_slices_mut();
                let grad_refs: Vec<&[f64]> = grads.groups.iter().map(|g| g.as_slice()).collect();
                adam_step(&mut params, &grad_refs, &mut adam)?;
            }
            // Keep parameters exactly representable in f32 so saved models
            // reproduce in-memory behavior bit for bit.
            model.quantize_params_f32();
            epoch_loss += loss;
        }
        loss_curve.push(epoch_loss / data.len() as f64);
    }

    model.meta.epochs_trained += cfg.epochs;
    model.meta.seed = cfg.seed;
    model
        .meta
        .loss_curve
        .extend(loss_curve.iter().map(|&v| v as f32));
    Ok(TrainReport {
        loss_curve,
        sequences: data.len(),
    })
}
