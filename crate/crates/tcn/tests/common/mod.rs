//! Helpers shared by the integration test binaries: seeded random data
//! generators and reference (oracle) implementations kept deliberately
//! independent of the library's own algorithms.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tcn::metrics::{iou, labels_to_segments, Segment};
use tcn::SeqTensor;

/// Relative error with an absolute floor so near-zero pairs compare sanely.
pub fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-6)
}

/// Random label tiling with at most `max_segments` runs. Adjacent runs get
/// distinct classes so the segment count is exactly the run count.
pub fn random_tiling(rng: &mut ChaCha8Rng, max_segments: usize, num_classes: usize) -> Vec<usize> {
    let segments = rng.gen_range(1..=max_segments);
    let mut labels = Vec::new();
    let mut prev = usize::MAX;
    for _ in 0..segments {
        let class = loop {
            let c = rng.gen_range(0..num_classes);
            if c != prev || num_classes == 1 {
                break c;
            }
        };
        let len = rng.gen_range(1..=8);
        labels.extend(std::iter::repeat_n(class, len));
        prev = class;
    }
    labels
}

pub fn random_segments(
    rng: &mut ChaCha8Rng,
    max_segments: usize,
    num_classes: usize,
) -> Vec<Segment> {
    labels_to_segments(&random_tiling(rng, max_segments, num_classes))
}

/// Highest F1-achievable match counts: tries every injective assignment of
/// predictions to same-class truths with IoU >= tau and keeps the best
/// true-positive count. Exponential, fine for the small instances tested.
pub fn exhaustive_counts(pred: &[Segment], truth: &[Segment], tau: f64) -> (usize, usize, usize) {
    fn best(
        pred: &[Segment],
        truth: &[Segment],
        tau: f64,
        used: &mut Vec<bool>,
        i: usize,
    ) -> usize {
        if i == pred.len() {
            return 0;
        }
        // Leaving prediction i unmatched is always an option.
        let mut top = best(pred, truth, tau, used, i + 1);
        for (j, t) in truth.iter().enumerate() {
            if !used[j] && t.class_id == pred[i].class_id && iou(&pred[i], t) >= tau {
                used[j] = true;
                top = top.max(1 + best(pred, truth, tau, used, i + 1));
                used[j] = false;
            }
        }
        top
    }
    let tp = best(pred, truth, tau, &mut vec![false; truth.len()], 0);
    (tp, pred.len() - tp, truth.len() - tp)
}

/// F1 percentage from (tp, fp, fn) counts; 0 when nothing was retrievable.
pub fn f1_from_counts(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        100.0 * 2.0 * tp as f64 / denom as f64
    }
}

/// Textbook full-matrix Levenshtein distance, kept separate from the
/// library's rolling-row version.
pub fn levenshtein_matrix(a: &[usize], b: &[usize]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = (d[i - 1][j] + 1)
                .min(d[i][j - 1] + 1)
                .min(d[i - 1][j - 1] + sub);
        }
    }
    d[a.len()][b.len()]
}

/// Uniform random tensor with entries in [-1, 1].
pub fn random_tensor(rng: &mut ChaCha8Rng, channels: usize, frames: usize) -> SeqTensor {
    let data: Vec<f64> = (0..channels * frames)
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    SeqTensor::from_flat(channels, frames, data).unwrap()
}
