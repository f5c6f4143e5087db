//! Trains both architectures on the built-in composed-action generator and
//! prints their evaluation reports side by side.
//!
//! The generated sequences chain three high-level actions whose subactions
//! share frame-wise features, so any per-frame classifier tops out well
//! below the temporal models.
//!
//! ```text
//! cargo run --release --example train_composition
//! ```

use anyhow::Result;
use tcn::metrics::{evaluate_dataset, EvalSettings};
use tcn::models::{train, DilatedTcnSpec, EdTcnSpec, ModelSpec, TcnModel, TrainConfig};
use tcn::synth::{fit_frame_oracle, gen_composition, CompositionSpec, FEATURE_DIM, NUM_CLASSES};

fn main() -> Result<()> {
    let data = gen_composition(&CompositionSpec::default())?;
    println!(
        "dataset: {} train / {} test sequences, {} frames each",
        data.train.len(),
        data.test.len(),
        data.train[0].0.frames()
    );

    // Both models sized to see 16 frames of context.
    let mut ed = EdTcnSpec::new(FEATURE_DIM, NUM_CLASSES, 2, 5);
    ed.filters = vec![8, 12];
    let mut dilated = DilatedTcnSpec::new(FEATURE_DIM, NUM_CLASSES, 2, 3);
    dilated.num_filters = 16;
    dilated.causal = false;

    let cfg = TrainConfig {
        epochs: 60,
        seed: 1,
        ..TrainConfig::default()
    };

    for (name, spec) in [
        ("encoder-decoder", ModelSpec::EdTcn(ed)),
        ("dilated", ModelSpec::Dilated(dilated)),
    ] {
        let mut model = TcnModel::build(spec, cfg.seed)?;
        println!(
            "\n=== {name}: {} parameters, receptive field {} ===",
            model.num_params(),
            model.receptive_field()
        );
        let report = train(&mut model, &data.train, &cfg)?;
        println!(
            "trained {} epochs, loss {:.4} -> {:.4}",
            cfg.epochs,
            report.loss_curve[0],
            report.loss_curve.last().unwrap()
        );

        let mut pairs = Vec::new();
        let mut probs = Vec::new();
        for (x, y) in &data.test {
            pairs.push((model.predict_labels(x)?, y.clone()));
            probs.push(model.forward(x)?);
        }
        let eval = evaluate_dataset(&pairs, Some(&probs), &EvalSettings::default())?;
        print!("{}", eval.to_text());
    }

    // The memoryless ceiling: the best possible frame-by-frame lookup.
    let oracle = fit_frame_oracle(&data.train);
    println!(
        "\nframe-wise oracle accuracy (memoryless ceiling): {:.2}",
        oracle.accuracy(&data.test)
    );
    Ok(())
}
