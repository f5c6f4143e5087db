//! Prints the closed-form receptive fields for a range of configurations,
//! then measures one model's actual gradient footprint frame by frame.
//!
//! The footprint probe seeds an upstream gradient at a single output frame
//! and marks every input frame whose gradient comes back nonzero. On causal
//! models no frame after the probe may ever light up.
//!
//! ```text
//! cargo run --release --example receptive_fields
//! ```

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tcn::models::{
    receptive_field_dilated, receptive_field_ed, DilatedTcnSpec, ModelSpec, TcnModel,
};
use tcn::SeqTensor;

fn main() -> Result<()> {
    println!("encoder-decoder, d * (2^L - 1) + 1:");
    for layers in 1..=4 {
        let row: Vec<String> = (1..=10)
            .map(|d| format!("{:>4}", receptive_field_ed(d, layers)))
            .collect();
        println!("  L={layers}: d=1..10 -> {}", row.join(" "));
    }
    println!("dilated, B * 2^L:");
    for blocks in 1..=4 {
        let row: Vec<String> = (1..=6)
            .map(|l| format!("{:>4}", receptive_field_dilated(blocks, l)))
            .collect();
        println!("  B={blocks}: L=1..6 -> {}", row.join(" "));
    }

    // Footprint of a causal dilated model with one block of two layers:
    // dilations 1 and 2, two taps each, so frames t-3..t can reach frame t.
    let mut spec = DilatedTcnSpec::new(3, 4, 1, 2);
    spec.num_filters = 16;
    let model = TcnModel::build(ModelSpec::Dilated(spec), 21)?;
    let frames = 40;
    let probe = 30;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = SeqTensor::from_flat(
        3,
        frames,
        (0..3 * frames).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    )?;
    let mut upstream = SeqTensor::zeros(4, frames);
    for c in 0..4 {
        upstream.set(c, probe, 1.0);
    }
    let g = model.input_gradient(&x, &upstream)?;
    let touched: Vec<usize> = (0..frames)
        .filter(|&t| (0..3).any(|c| g.at(c, t) != 0.0))
        .collect();
    println!("\ncausal dilated B=1 L=2, probe at frame {probe}:");
    println!("  formula says {} frames", model.receptive_field());
    println!("  gradient reaches frames {touched:?}");
    Ok(())
}
