//! Trains a small model briefly, then renders the ground truth against its
//! predictions as an ASCII chart on stdout and as an SVG file.
//!
//! ```text
//! cargo run --release --example timeline_render
//! ```

use anyhow::Result;
use tcn::models::{train, EdTcnSpec, ModelSpec, TcnModel, TrainConfig};
use tcn::synth::{gen_composition, CompositionSpec, FEATURE_DIM, NUM_CLASSES};
use tcn::timeline::{render_ascii, render_svg, TimelineRow};

fn main() -> Result<()> {
    let data = gen_composition(&CompositionSpec {
        num_train: 20,
        num_test: 3,
        ..CompositionSpec::default()
    })?;

    let mut spec = EdTcnSpec::new(FEATURE_DIM, NUM_CLASSES, 2, 5);
    spec.filters = vec![8, 12];
    let mut model = TcnModel::build(ModelSpec::EdTcn(spec), 1)?;
    train(
        &mut model,
        &data.train,
        &TrainConfig {
            epochs: 40,
            seed: 1,
            ..TrainConfig::default()
        },
    )?;

    let mut rows = Vec::new();
    for (i, (features, labels)) in data.test.iter().enumerate() {
        rows.push(TimelineRow::new(format!("truth {i}"), labels.clone()));
        rows.push(TimelineRow::new(
            format!("model {i}"),
            model.predict_labels(features)?,
        ));
    }

    println!("{}", render_ascii(&rows, 100)?);

    let svg = render_svg(&rows)?;
    let path = std::env::temp_dir().join("tcn_timeline.svg");
    std::fs::write(&path, &svg)?;
    println!("wrote {} bytes of SVG to {}", svg.len(), path.display());
    Ok(())
}
