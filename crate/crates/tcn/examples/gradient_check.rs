//! Spot-checks the hand-written backward passes against central finite
//! differences on a tiny model of each architecture.
//!
//! `loss_gradients` returns the training loss and its gradient for every
//! parameter tensor; here a few random coordinates per tensor are nudged by
//! 1e-3 and the difference quotient is compared with the analytic value.
//!
//! ```text
//! cargo run --release --example gradient_check
//! ```

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tcn::models::{DilatedTcnSpec, EdTcnSpec, ModelSpec, TcnModel};
use tcn::nn::cross_entropy;
use tcn::SeqTensor;

const STEP: f64 = 1e-3;

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);

    let mut ed = EdTcnSpec::new(3, 4, 2, 3);
    ed.filters = vec![4, 6];
    let mut dilated = DilatedTcnSpec::new(3, 4, 1, 2);
    dilated.num_filters = 6;

    for (name, spec) in [
        ("encoder-decoder", ModelSpec::EdTcn(ed)),
        ("dilated", ModelSpec::Dilated(dilated)),
    ] {
        let mut model = TcnModel::build(spec, 7)?;
        let frames = 12;
        let x = SeqTensor::from_flat(
            3,
            frames,
            (0..3 * frames).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )?;
        let labels: Vec<usize> = (0..frames).map(|_| rng.gen_range(0..4)).collect();

        let (loss, grads) = model.loss_gradients(&x, &labels)?;
        println!("=== {name}: loss {loss:.4} ===");

        // Walk the parameter tensors; grads.groups lines up with the visit
        // order, so an offset into the flattened gradient tracks each one.
        let shapes = model.param_summary();
        let mut worst = 0.0f64;
        for (group, (tensor_name, _)) in shapes.iter().enumerate() {
            let coords = grads.groups[group].len();
            let probe = rng.gen_range(0..coords);
            let analytic = grads.groups[group][probe];

            let numeric = {
                let mut base = f64::NAN;
                let mut seen = 0usize;
                model.visit_params(&mut |_, _, vals| {
                    if seen == group {
                        base = vals[probe];
                    }
                    seen += 1;
                });
                let mut at = |value: f64| -> Result<f64> {
                    let mut seen = 0usize;
                    model.visit_params_mut(&mut |_, _, vals| {
                        if seen == group {
                            vals[probe] = value;
                        }
                        seen += 1;
                    });
                    Ok(cross_entropy(&model.forward(&x)?, &labels, None)?.0)
                };
                let plus = at(base + STEP)?;
                let minus = at(base - STEP)?;
                at(base)?;
                (plus - minus) / (2.0 * STEP)
            };

            let err = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(err);
            println!(
                "  {tensor_name:<28} coord {probe:>3}: analytic {analytic:>12.6e}, \
                 numeric {numeric:>12.6e}, rel err {err:.2e}"
            );
        }
        println!("  worst relative error: {worst:.2e}\n");
    }
    Ok(())
}
