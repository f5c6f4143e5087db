//! Run configuration files: strict `key=value` lines, one setting per line.
//!
//! ```text
//! model=ed
//! L=2
//! d=5
//! epochs=200
//! tau=10,25,50
//! ```
//!
//! Unknown and repeated keys are errors, so typos fail loudly instead of
//! silently training with defaults.

use crate::error::{Result, TcnError};
use crate::models::{DilatedTcnSpec, EdTcnSpec, ModelSpec, TrainConfig};
use crate::nn::Activation;
use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    EdTcn,
    Dilated,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::EdTcn => "ed",
            ModelKind::Dilated => "dilated",
        }
    }

    pub fn parse(s: &str) -> Option<ModelKind> {
        match s {
            "ed" | "ed_tcn" => Some(ModelKind::EdTcn),
            "dilated" | "dilated_tcn" => Some(ModelKind::Dilated),
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything a training or evaluation run needs beyond the dataset itself.
/// Architecture fields are optional here; `model_spec` enforces which ones
/// the chosen model actually requires.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ModelKind,
    /// Encoder depth (ed) or layers per block (dilated).
    pub num_layers: Option<usize>,
    /// Filter duration in frames (ed only).
    pub duration: Option<usize>,
    /// Block count (dilated only).
    pub num_blocks: Option<usize>,
    /// Channel width (dilated only).
    pub num_filters: Option<usize>,
    /// Per-layer filter counts overriding the default schedule (ed only).
    pub filters: Option<Vec<usize>>,
    pub activation: Option<Activation>,
    pub causal: Option<bool>,
    pub epochs: u32,
    pub learning_rate: f64,
    pub dropout: f64,
    pub seed: u64,
    pub shuffle: bool,
    /// Overlap thresholds for F1/mAP; values above 1 are read as percent.
    pub taus: Vec<f64>,
    pub background_id: Option<usize>,
}

impl RunConfig {
    pub fn new(model: ModelKind) -> RunConfig {
        let train = TrainConfig::default();
        RunConfig {
            model,
            num_layers: None,
            duration: None,
            num_blocks: None,
            num_filters: None,
            filters: None,
            activation: None,
            causal: None,
            epochs: train.epochs,
            learning_rate: train.learning_rate,
            dropout: train.dropout,
            seed: train.seed,
            shuffle: train.shuffle,
            taus: vec![0.10, 0.25, 0.50],
            background_id: None,
        }
    }

    pub fn read(path: impl AsRef<Path>) -> Result<RunConfig> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| TcnError::data(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::parse_str(&text, &path.display().to_string())
    }

    pub fn parse_str(text: &str, name: &str) -> Result<RunConfig> {
        let mut seen = BTreeSet::new();
        let mut model = None;
        let mut cfg = RunConfig::new(ModelKind::EdTcn);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = format!("line {}", i + 1);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| TcnError::parse(name, &at, "expected key=value"))?;
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(TcnError::parse(name, &at, format!("duplicate key {key:?}")));
            }
            let bad = |what: &str| TcnError::parse(name, &at, format!("bad {what} {value:?}"));
            match key {
                "model" => {
                    model = Some(ModelKind::parse(value).ok_or_else(|| {
                        TcnError::parse(
                            name,
                            &at,
                            format!("unknown model {value:?} (expected ed or dilated)"),
                        )
                    })?);
                }
                "L" => cfg.num_layers = Some(value.parse().map_err(|_| bad("layer count"))?),
                "d" => cfg.duration = Some(value.parse().map_err(|_| bad("filter duration"))?),
                "B" => cfg.num_blocks = Some(value.parse().map_err(|_| bad("block count"))?),
                "fw" => cfg.num_filters = Some(value.parse().map_err(|_| bad("filter width"))?),
                "filters" => {
                    let list: Result<Vec<usize>> = value
                        .split(',')
                        .map(|v| v.trim().parse().map_err(|_| bad("filter list")))
                        .collect();
                    cfg.filters = Some(list?);
                }
                "activation" => {
                    cfg.activation = Some(
                        Activation::from_name(value)
                            .map_err(|e| TcnError::parse(name, &at, e.to_string()))?,
                    );
                }
                "causal" => cfg.causal = Some(parse_bool(value).ok_or_else(|| bad("flag"))?),
                "epochs" => cfg.epochs = value.parse().map_err(|_| bad("epoch count"))?,
                "learning_rate" => {
                    cfg.learning_rate = value.parse().map_err(|_| bad("learning rate"))?;
                }
                "dropout" => cfg.dropout = value.parse().map_err(|_| bad("dropout rate"))?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad("seed"))?,
                "shuffle" => cfg.shuffle = parse_bool(value).ok_or_else(|| bad("flag"))?,
                "tau" => {
                    cfg.taus = parse_tau_list(value)
                        .map_err(|e| TcnError::parse(name, &at, e.to_string()))?;
                }
                "background_id" => {
                    cfg.background_id = Some(value.parse().map_err(|_| bad("class id"))?);
                }
                other => {
                    return Err(TcnError::parse(name, &at, format!("unknown key {other:?}")));
                }
            }
        }
        cfg.model =
            model.ok_or_else(|| TcnError::parse(name, "end of file", "missing model line"))?;
        Ok(cfg)
    }

    /// Builds the architecture spec for data of the given shape. Fields the
    /// chosen model does not use are rejected rather than ignored.
    pub fn model_spec(&self, input_dim: usize, num_classes: usize) -> Result<ModelSpec> {
        let spec = match self.model {
            ModelKind::EdTcn => {
                if self.num_blocks.is_some() || self.num_filters.is_some() {
                    return Err(TcnError::config("B and fw only apply to model=dilated"));
                }
                let layers = self
                    .num_layers
                    .ok_or_else(|| TcnError::config("model=ed needs L"))?;
                let duration = self
                    .duration
                    .ok_or_else(|| TcnError::config("model=ed needs d"))?;
                let mut spec = EdTcnSpec::new(input_dim, num_classes, layers, duration);
                if let Some(filters) = &self.filters {
                    spec.filters = filters.clone();
                }
                if let Some(act) = self.activation {
                    spec.activation = act;
                }
                if let Some(causal) = self.causal {
                    spec.causal = causal;
                }
                ModelSpec::EdTcn(spec)
            }
            ModelKind::Dilated => {
                if self.duration.is_some() || self.filters.is_some() {
                    return Err(TcnError::config("d and filters only apply to model=ed"));
                }
                let blocks = self
                    .num_blocks
                    .ok_or_else(|| TcnError::config("model=dilated needs B"))?;
                let layers = self
                    .num_layers
                    .ok_or_else(|| TcnError::config("model=dilated needs L"))?;
                let mut spec = DilatedTcnSpec::new(input_dim, num_classes, blocks, layers);
                if let Some(width) = self.num_filters {
                    spec.num_filters = width;
                }
                if let Some(act) = self.activation {
                    spec.activation = act;
                }
                if let Some(causal) = self.causal {
                    spec.causal = causal;
                }
                ModelSpec::Dilated(spec)
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            dropout: self.dropout,
            seed: self.seed,
            shuffle: self.shuffle,
        }
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

/// Comma list of overlap thresholds. Values above 1 are read as percent, so
/// `10,25,50` and `0.1,0.25,0.5` mean the same thing.
pub fn parse_tau_list(value: &str) -> Result<Vec<f64>> {
    let mut taus = Vec::new();
    for v in value.split(',') {
        let t: f64 = v
            .trim()
            .parse()
            .map_err(|_| TcnError::config(format!("bad threshold list {value:?}")))?;
        let t = if t > 1.0 { t / 100.0 } else { t };
        if !(t > 0.0 && t <= 1.0) {
            return Err(TcnError::config(format!(
                "thresholds must land in (0, 100], got {v:?}"
            )));
        }
        taus.push(t);
    }
    if taus.is_empty() {
        Err(TcnError::config("threshold list is empty"))
    } else {
        Ok(taus)
    }
}
