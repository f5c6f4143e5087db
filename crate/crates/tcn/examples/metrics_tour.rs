//! Walks through every evaluation metric on tiny hand-built label sequences,
//! showing where each one is blind and which failure modes it punishes.
//!
//! ```text
//! cargo run --example metrics_tour
//! ```

use anyhow::Result;
use tcn::metrics::{
    attach_confidences, edit_score, f1_at_k, frame_accuracy, labels_to_segments, map_detection,
    segments_to_labels, ConfidencePolicy, MatchCriterion, Segment,
};
use tcn::SeqTensor;

fn labels(spans: &[(usize, usize)]) -> Vec<usize> {
    spans
        .iter()
        .flat_map(|&(class, len)| std::iter::repeat_n(class, len))
        .collect()
}

fn describe(name: &str, pred: &[usize], truth: &[usize]) -> Result<()> {
    let pred_segs = labels_to_segments(pred);
    let truth_segs = labels_to_segments(truth);
    let acc = frame_accuracy(pred, truth)?;
    let edit = edit_score(&pred_segs, &truth_segs, &[]);
    print!("{name:<22} acc {acc:6.2}  edit {edit:6.2}");
    for tau in [0.1, 0.25, 0.5] {
        let f1 = f1_at_k(&pred_segs, &truth_segs, tau, &[])?;
        print!("  F1@{:<4} {f1:6.2}", format!("{}", tau * 100.0));
    }
    println!();
    Ok(())
}

fn main() -> Result<()> {
    // Four actions over 40 frames: 0, 1, 2, then 0 again.
    let truth = labels(&[(0, 10), (1, 10), (2, 10), (0, 10)]);

    // Boundaries nudged by two frames: frame accuracy drops a little, the
    // ordering metrics do not care at all.
    let shifted = labels(&[(0, 12), (1, 8), (2, 12), (0, 8)]);

    // One action chopped into three by brief wrong-class blips: frame
    // accuracy barely moves, edit and F1 collapse.
    let choppy = labels(&[
        (0, 10),
        (1, 3),
        (2, 1),
        (1, 3),
        (0, 1),
        (1, 2),
        (2, 10),
        (0, 10),
    ]);

    println!("per-sequence metrics, higher is better:");
    describe("exact", &truth, &truth)?;
    describe("boundaries off by 2", &shifted, &truth)?;
    describe("over-segmented", &choppy, &truth)?;

    // Detection mAP needs confidences; pool them from fake per-frame
    // probabilities. The prediction repeats the class-0 action where the
    // truth has nothing, so one of the two detections is false. Mean
    // pooling ranks the real detection first because the impostor is
    // mostly low-probability; max pooling is fooled by its single spike.
    let truth_segs = vec![Segment::new(0, 0, 10)];
    let pred_segs = vec![Segment::new(0, 0, 10), Segment::new(0, 20, 30)];
    let frames = 40;
    let mut probs = SeqTensor::zeros(2, frames);
    for t in 0..frames {
        let p = if t < 10 {
            0.6
        } else if t == 25 {
            0.95
        } else if (20..30).contains(&t) {
            0.3
        } else {
            0.05
        };
        probs.set(0, t, p);
        probs.set(1, t, 1.0 - p);
    }
    println!("\ndetection mAP@0.5 on a duplicated action:");
    for policy in [ConfidencePolicy::Mean, ConfidencePolicy::Max] {
        let scored = attach_confidences(&probs, &pred_segs, policy)?;
        let map = map_detection(&scored, &truth_segs, MatchCriterion::Iou(0.5))?;
        println!("  {:<4} pooling -> {map:6.2}", policy.name());
    }

    // Segments and labels round-trip exactly.
    let segs = labels_to_segments(&truth);
    assert_eq!(segments_to_labels(&segs)?, truth);
    println!(
        "\n{} truth segments round-trip through labels exactly",
        segs.len()
    );
    Ok(())
}
