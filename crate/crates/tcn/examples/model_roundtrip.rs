//! Trains a small model for a few epochs, saves it to the binary weight
//! format, loads it back, and proves the reload is exact: the struct
//! compares equal, a re-save is byte-identical, and the forward pass on
//! fresh input matches bit for bit.
//!
//! Weights are stored as 32-bit floats, and the trainer rounds parameters
//! through 32-bit after every update, so saving loses nothing.
//!
//! ```text
//! cargo run --release --example model_roundtrip
//! ```

use anyhow::Result;
use tcn::models::{load_model, save_model, train, EdTcnSpec, ModelSpec, TcnModel, TrainConfig};
use tcn::synth::{gen_composition, CompositionSpec, FEATURE_DIM, NUM_CLASSES};

fn main() -> Result<()> {
    let data = gen_composition(&CompositionSpec {
        num_train: 8,
        num_test: 2,
        seq_len: 80,
        ..CompositionSpec::default()
    })?;

    let mut spec = EdTcnSpec::new(FEATURE_DIM, NUM_CLASSES, 2, 5);
    spec.filters = vec![8, 12];
    let mut model = TcnModel::build(ModelSpec::EdTcn(spec), 3)?;
    let report = train(
        &mut model,
        &data.train,
        &TrainConfig {
            epochs: 10,
            seed: 3,
            ..TrainConfig::default()
        },
    )?;
    println!(
        "trained {} params for {} epochs, loss {:.4} -> {:.4}",
        model.num_params(),
        report.loss_curve.len(),
        report.loss_curve.first().unwrap(),
        report.loss_curve.last().unwrap()
    );

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("model.tcnm");
    save_model(&model, &path)?;
    let bytes = std::fs::metadata(&path)?.len();
    println!("saved {bytes} bytes to {}", path.display());

    let loaded = load_model(&path)?;
    assert_eq!(loaded, model, "reloaded model differs from the original");

    let resaved = dir.path().join("again.tcnm");
    save_model(&loaded, &resaved)?;
    assert_eq!(
        std::fs::read(&path)?,
        std::fs::read(&resaved)?,
        "second save is not byte-identical"
    );

    for (i, (features, _)) in data.test.iter().enumerate() {
        let a = model.forward(features)?;
        let b = loaded.forward(features)?;
        assert_eq!(a.as_slice(), b.as_slice(), "forward pass diverged");
        println!(
            "test sequence {i}: forward pass identical over {} frames",
            a.frames()
        );
    }
    println!("round trip exact: struct, bytes, and outputs all match");
    Ok(())
}
