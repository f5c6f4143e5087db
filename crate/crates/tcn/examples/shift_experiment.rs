//! Measures how the encoder-decoder model degrades when the input features
//! are delayed relative to the labels.
//!
//! The generator keeps labels fixed and shifts the feature stream right by
//! `s` frames. A model with a 16-frame receptive field should shrug off
//! small delays, lose ground around half its receptive field, and collapse
//! once the delay exceeds it.
//!
//! ```text
//! cargo run --release --example shift_experiment
//! ```

use anyhow::Result;
use tcn::metrics::{evaluate_dataset, EvalSettings};
use tcn::models::{train, EdTcnSpec, ModelSpec, TcnModel, TrainConfig};
use tcn::synth::{gen_shift, CompositionSpec, ShiftSpec, FEATURE_DIM, NUM_CLASSES};

fn main() -> Result<()> {
    let seeds: [u64; 5] = [1, 2, 3, 4, 5];
    println!("shift | F1@10 per seed                | median");
    println!("------+-------------------------------+-------");
    for shift in [0usize, 5, 10, 15, 20] {
        let data = gen_shift(&ShiftSpec {
            base: CompositionSpec::default(),
            shift,
        })?;
        let mut scores = Vec::with_capacity(seeds.len());
        for &seed in &seeds {
            let mut spec = EdTcnSpec::new(FEATURE_DIM, NUM_CLASSES, 2, 5);
            spec.filters = vec![8, 12];
            let mut model = TcnModel::build(ModelSpec::EdTcn(spec), seed)?;
            let cfg = TrainConfig {
                epochs: 60,
                seed,
                ..TrainConfig::default()
            };
            train(&mut model, &data.train, &cfg)?;
            let pairs: Result<Vec<_>, _> = data
                .test
                .iter()
                .map(|(x, y)| model.predict_labels(x).map(|p| (p, y.clone())))
                .collect();
            let eval = evaluate_dataset(
                &pairs?,
                None,
                &EvalSettings {
                    taus: vec![0.10],
                    background: None,
                },
            )?;
            scores.push(eval.f1[0].1);
        }
        let mut sorted = scores.clone();
        sorted.sort_by(f64::total_cmp);
        let row: Vec<String> = scores.iter().map(|s| format!("{s:5.1}")).collect();
        println!("  {shift:>3} | {} | {:5.1}", row.join(" "), sorted[2]);
    }
    Ok(())
}
