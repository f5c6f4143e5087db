//! Synthetic sequence generators.
//!
//! The composition generator emits label sequences over five classes
//! (A1, A2, A3, B, C) driven by three high-level actions: action A always
//! runs its subactions A1, A2, A3 in order, then hands off to B or C with
//! equal probability; after B or C the next action is drawn uniformly from
//! the other two. Features are three-dimensional with +1 on the active
//! high-level action and -1 elsewhere, so A1, A2 and A3 share one feature
//! vector and are distinguishable only through temporal context.
//!
//! The shift generator delays features against labels by a fixed number of
//! frames on both splits, clamping at the sequence start.

use crate::error::{Result, TcnError};
use crate::nn::SeqTensor;
use crate::{LabelSequence, LabelledSequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt::Write as _;

pub const NUM_CLASSES: usize = 5;
pub const FEATURE_DIM: usize = 3;
pub const CLASS_NAMES: [&str; NUM_CLASSES] = ["A1", "A2", "A3", "B", "C"];

/// Label ids in dataset order.
pub const A1: usize = 0;
pub const A2: usize = 1;
pub const A3: usize = 2;
pub const B: usize = 3;
pub const C: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionSpec {
    pub num_train: usize,
    pub num_test: usize,
    pub seq_len: usize,
    /// Fixed frame counts per class, indexed by label id.
    pub durations: [usize; NUM_CLASSES],
    pub seed: u64,
}

impl Default for CompositionSpec {
    fn default() -> Self {
        CompositionSpec {
            num_train: 50,
            num_test: 10,
            seq_len: 150,
            durations: [8, 8, 8, 12, 16],
            seed: 0,
        }
    }
}

impl CompositionSpec {
    pub fn validate(&self) -> Result<()> {
        if self.seq_len == 0 {
            return Err(TcnError::config("sequence length must be positive"));
        }
        if self.num_train == 0 {
            return Err(TcnError::config("need at least one training sequence"));
        }
        for (class, &d) in self.durations.iter().enumerate() {
            if d == 0 {
                return Err(TcnError::config(format!(
                    "duration of class {} must be at least 1",
                    CLASS_NAMES[class]
                )));
            }
            if d > self.seq_len {
                return Err(TcnError::config(format!(
                    "duration {d} of class {} exceeds the sequence length {}",
                    CLASS_NAMES[class], self.seq_len
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftSpec {
    pub base: CompositionSpec,
    /// Feature delay in frames.
    pub shift: usize,
}

impl ShiftSpec {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.shift >= self.base.seq_len {
            return Err(TcnError::config(format!(
                "shift {} must be smaller than the sequence length {}",
                self.shift, self.base.seq_len
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub train: Vec<LabelledSequence>,
    pub test: Vec<LabelledSequence>,
}

/// High-level action of a label id.
fn high_level(label: usize) -> usize {
    match label {
        A1 | A2 | A3 => 0,
        B => 1,
        _ => 2,
    }
}

fn features_from_labels(labels: &[usize]) -> SeqTensor {
    let mut x = SeqTensor::zeros(FEATURE_DIM, labels.len());
    for (t, &label) in labels.iter().enumerate() {
        let high = high_level(label);
        for c in 0..FEATURE_DIM {
            x.set(c, t, if c == high { 1.0 } else { -1.0 });
        }
    }
    x
}

fn gen_labels(spec: &CompositionSpec, rng: &mut ChaCha8Rng) -> LabelSequence {
    let t_max = spec.seq_len;
    let mut labels = Vec::with_capacity(t_max);
    let push = |labels: &mut Vec<usize>, class: usize| {
        let take = spec.durations[class].min(t_max - labels.len());
        labels.extend(std::iter::repeat_n(class, take));
    };
    // High-level state: 0 = A, 1 = B, 2 = C.
    let mut state = rng.gen_range(0..3usize);
    while labels.len() < t_max {
        match state {
            0 => {
                for sub in [A1, A2, A3] {
                    push(&mut labels, sub);
                }
            }
            1 => push(&mut labels, B),
            _ => push(&mut labels, C),
        }
        if labels.len() >= t_max {
            break;
        }
        // Move to one of the other two actions with equal probability.
        let coin = rng.gen_range(0..2usize);
        state = match state {
            0 => [1, 2][coin],
            1 => [0, 2][coin],
            _ => [0, 1][coin],
        };
    }
    labels
}

/// Generates the composition dataset. Each sequence draws from its own
/// ChaCha8 stream (train uses streams `0..num_train`, test continues after),
/// so generation is order-independent and reproducible per seed.
pub fn gen_composition(spec: &CompositionSpec) -> Result<Dataset> {
    spec.validate()?;
    let gen_split = |offset: usize, count: usize| -> Vec<LabelledSequence> {
        (0..count)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                rng.set_stream((offset + i) as u64);
                let labels = gen_labels(spec, &mut rng);
                (features_from_labels(&labels), labels)
            })
            .collect()
    };
    Ok(Dataset {
        train: gen_split(0, spec.num_train),
        test: gen_split(spec.num_train, spec.num_test),
    })
}

/// Delays one feature sequence by `shift` frames, repeating the first frame
/// at the clamped start. Labels are untouched by design.
pub fn apply_shift(x: &SeqTensor, shift: usize) -> SeqTensor {
    let mut out = SeqTensor::zeros(x.channels(), x.frames());
    for c in 0..x.channels() {
        let src = x.row(c);
        let dst = out.row_mut(c);
        for (t, d) in dst.iter_mut().enumerate() {
            *d = src[t.saturating_sub(shift)];
        }
    }
    out
}

/// Composition dataset with features delayed on both splits.
pub fn gen_shift(spec: &ShiftSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut data = gen_composition(&spec.base)?;
    for (x, _) in data.train.iter_mut().chain(data.test.iter_mut()) {
        *x = apply_shift(x, spec.shift);
    }
    Ok(data)
}

/// Best memoryless classifier: a lookup from exact feature vector to the
/// majority label among frames that carried it.
#[derive(Debug, Clone)]
pub struct FrameOracle {
    map: BTreeMap<Vec<u64>, usize>,
    fallback: usize,
}

fn frame_key(x: &SeqTensor, t: usize) -> Vec<u64> {
    (0..x.channels()).map(|c| x.at(c, t).to_bits()).collect()
}

/// Fits the majority map on `data`. On tied counts the lowest label wins.
pub fn fit_frame_oracle(data: &[LabelledSequence]) -> FrameOracle {
    let mut counts: BTreeMap<Vec<u64>, Vec<usize>> = BTreeMap::new();
    let mut class_totals: Vec<usize> = Vec::new();
    for (x, labels) in data {
        for (t, &y) in labels.iter().enumerate() {
            let slot = counts.entry(frame_key(x, t)).or_default();
            if slot.len() <= y {
                slot.resize(y + 1, 0);
            }
            slot[y] += 1;
            if class_totals.len() <= y {
                class_totals.resize(y + 1, 0);
            }
            class_totals[y] += 1;
        }
    }
    let majority = |v: &[usize]| -> usize {
        let best = v.iter().max().copied().unwrap_or(0);
        v.iter().position(|&n| n == best).unwrap_or(0)
    };
    FrameOracle {
        fallback: majority(&class_totals),
        map: counts
            .into_iter()
            .map(|(k, v)| {
                let m = majority(&v);
                (k, m)
            })
            .collect(),
    }
}

impl FrameOracle {
    pub fn predict(&self, x: &SeqTensor) -> LabelSequence {
        (0..x.frames())
            .map(|t| {
                self.map
                    .get(&frame_key(x, t))
                    .copied()
                    .unwrap_or(self.fallback)
            })
            .collect()
    }

    /// Frame accuracy (%) of the oracle over a set of sequences.
    pub fn accuracy(&self, data: &[LabelledSequence]) -> f64 {
        let mut frames = 0usize;
        let mut hits = 0usize;
        for (x, labels) in data {
            let pred = self.predict(x);
            frames += labels.len();
            hits += pred.iter().zip(labels).filter(|(p, t)| p == t).count();
        }
        100.0 * hits as f64 / frames.max(1) as f64
    }
}

/// Human-readable dump of the generator's ground truth: durations, feature
/// encodings, and transition probabilities. Written next to generated
/// datasets for audit.
pub fn transition_table(spec: &CompositionSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Composition generator ground truth");
    let _ = writeln!(out, "classes={}", CLASS_NAMES.join(","));
    for (i, name) in CLASS_NAMES.iter().enumerate() {
        let _ = writeln!(out, "duration.{name}={}", spec.durations[i]);
    }
    let _ = writeln!(out, "feature.A=+1,-1,-1");
    let _ = writeln!(out, "feature.B=-1,+1,-1");
    let _ = writeln!(out, "feature.C=-1,-1,+1");
    let _ = writeln!(out, "start=A:1/3,B:1/3,C:1/3");
    let _ = writeln!(out, "within.A=A1->A2->A3 (deterministic)");
    let _ = writeln!(out, "after.A=B:1/2,C:1/2");
    let _ = writeln!(out, "after.B=A:1/2,C:1/2");
    let _ = writeln!(out, "after.C=A:1/2,B:1/2");
    out
}
