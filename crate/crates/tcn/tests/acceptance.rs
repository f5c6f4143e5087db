//! Shipping checklist for the whole engine. Every numbered test prints one
//! `ACCEPTANCE <n> <name>: PASS` or `... : FAIL` line before asserting, so a
//! run with `--nocapture` reads as a checklist and a red test still leaves
//! its measurements on screen.
//!
//! The training-heavy checks share a lock: they are budgeted for a single
//! CPU core and must not run concurrently with each other.

mod common;

use common::{exhaustive_counts, levenshtein_matrix, random_tensor, rel_err};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::cell::RefCell;
use std::collections::BTreeSet;
use std::sync::{Mutex, MutexGuard};
use std::time::{Duration, Instant};
use tcn::metrics::{
    attach_confidences, edit_score, evaluate_dataset, f1_at_k, f1_counts, map_detection,
    ConfidencePolicy, EvalSettings, MatchCriterion, Segment,
};
use tcn::models::{
    load_model, receptive_field_dilated, receptive_field_ed, save_model, train, DilatedTcnSpec,
    EdTcnSpec, ModelSpec, TcnModel, TrainConfig,
};
use tcn::nn::{
    activation_backward, activation_forward, cross_entropy, dense_backward, dense_forward,
    dropout_backward, max_pool_time, max_pool_time_backward, softmax_frames, spatial_dropout,
    temporal_conv_backward, temporal_conv_forward, upsample_time, upsample_time_backward,
    Activation, ConvFilterBank, ConvMode, DenseLayer,
};
use tcn::synth::{
    fit_frame_oracle, gen_composition, gen_shift, CompositionSpec, ShiftSpec, FEATURE_DIM,
    NUM_CLASSES,
};
use tcn::{LabelledSequence, SeqTensor};

static HEAVY: Mutex<()> = Mutex::new(());

/// Serializes the training-heavy tests; a poisoned lock (an earlier heavy
/// test failed) must not cascade, so the guard shrugs poisoning off.
fn heavy_lock() -> MutexGuard<'static, ()> {
    HEAVY.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(n: u32, name: &str, pass: bool) {
    println!(
        "ACCEPTANCE {n} {name}: {}",
        if pass { "PASS" } else { "FAIL" }
    );
}

// ---------------------------------------------------------------------------
// Shared experiment setup: both architectures tuned to a receptive field of
// 16 frames, sized to train in seconds on one core.
// ---------------------------------------------------------------------------

const EPOCHS: u32 = 60;
const TRAIN_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn ed_rf16() -> ModelSpec {
    let mut spec = EdTcnSpec::new(FEATURE_DIM, NUM_CLASSES, 2, 5);
    spec.filters = vec![8, 12];
    ModelSpec::EdTcn(spec)
}

fn dilated_rf16() -> ModelSpec {
    let mut spec = DilatedTcnSpec::new(FEATURE_DIM, NUM_CLASSES, 2, 3);
    spec.num_filters = 16;
    spec.causal = false;
    ModelSpec::Dilated(spec)
}

fn train_cfg(seed: u64) -> TrainConfig {
    TrainConfig {
        epochs: EPOCHS,
        learning_rate: 1e-3,
        dropout: 0.3,
        seed,
        shuffle: true,
    }
}

/// Trains one model and returns its (F1@10, frame accuracy) on the test set.
fn fit_and_score(
    spec: &ModelSpec,
    train_set: &[LabelledSequence],
    test_set: &[LabelledSequence],
    seed: u64,
) -> (f64, f64) {
    let mut model = TcnModel::build(spec.clone(), seed).expect("buildable spec");
    train(&mut model, train_set, &train_cfg(seed)).expect("training succeeds");
    let pairs: Vec<_> = test_set
        .iter()
        .map(|(x, y)| (model.predict_labels(x).expect("forward pass"), y.clone()))
        .collect();
    let report = evaluate_dataset(
        &pairs,
        None,
        &EvalSettings {
            taus: vec![0.10],
            background: None,
        },
    )
    .expect("evaluation succeeds");
    (report.f1[0].1, report.frame_accuracy)
}

// ---------------------------------------------------------------------------
// 1. Both acausal nets, receptive field 16, learn the composed-action data.
// ---------------------------------------------------------------------------

#[test]
fn acceptance_01_composition_experiment() {
    let _guard = heavy_lock();
    let started = Instant::now();
    let budget = Duration::from_secs(300);

    let data = gen_composition(&CompositionSpec::default()).expect("generator");
    let mut all_good = true;
    for (name, spec) in [("ed-tcn", ed_rf16()), ("dilated", dilated_rf16())] {
        assert_eq!(
            TcnModel::build(spec.clone(), 0).unwrap().receptive_field(),
            16,
            "{name} must be configured to a receptive field of 16 frames"
        );
        let mut hits = 0;
        for &seed in &TRAIN_SEEDS {
            let (f1, acc) = fit_and_score(&spec, &data.train, &data.test, seed);
            let ok = f1 >= 95.0 && acc >= 98.0;
            hits += usize::from(ok);
            println!("  {name} seed {seed}: F1@10 {f1:.2}, accuracy {acc:.2}");
        }
        println!("  {name}: {hits}/5 seeds reached F1@10 >= 95 and accuracy >= 98");
        all_good &= hits >= 4;
    }
    let elapsed = started.elapsed();
    println!("  wall time: {:.1}s (budget 300s)", elapsed.as_secs_f64());
    let pass = all_good && elapsed < budget;
    verdict(
        1,
        "composition experiment, both nets at receptive field 16",
        pass,
    );
    assert!(
        pass,
        "expected both architectures to reach F1@10 >= 95 and accuracy >= 98 \
         in at least 4 of 5 seeds within the time budget"
    );
}

// ---------------------------------------------------------------------------
// 2. Delaying the features degrades the acausal ED-TCN gracefully.
// ---------------------------------------------------------------------------

#[test]
fn acceptance_02_feature_shift_degrades_gracefully() {
    let _guard = heavy_lock();
    let shifts = [0usize, 5, 10, 15, 20];
    let mut medians = Vec::with_capacity(shifts.len());
    for &shift in &shifts {
        let data = gen_shift(&ShiftSpec {
            base: CompositionSpec::default(),
            shift,
        })
        .expect("generator");
        let mut scores: Vec<f64> = TRAIN_SEEDS
            .iter()
            .map(|&seed| fit_and_score(&ed_rf16(), &data.train, &data.test, seed).0)
            .collect();
        scores.sort_by(f64::total_cmp);
        println!(
            "  shift {shift:>2}: F1@10 median {:.2} (seeds spread {:.2}..{:.2})",
            scores[2], scores[0], scores[4]
        );
        medians.push(scores[2]);
    }
    let unshifted_high = medians[0] >= 95.0;
    let non_increasing = medians.windows(2).all(|w| w[1] <= w[0]);
    let half_rf_usable = medians[2] >= 70.0;
    let beyond_rf_worst = medians[4] <= medians[2];
    let pass = unshifted_high && non_increasing && half_rf_usable && beyond_rf_worst;
    println!(
        "  checks: s=0 high {unshifted_high}, non-increasing {non_increasing}, \
         s=10 >= 70 {half_rf_usable}, s=20 <= s=10 {beyond_rf_worst}"
    );
    verdict(2, "feature-shift degradation profile", pass);
    assert!(pass, "median F1@10 across shifts was {medians:?}");
}

// ---------------------------------------------------------------------------
// 3. The best memoryless frame classifier stays below both temporal nets.
// ---------------------------------------------------------------------------

#[test]
fn acceptance_03_frame_oracle_stays_below_both_nets() {
    let _guard = heavy_lock();
    let data = gen_composition(&CompositionSpec::default()).expect("generator");
    let oracle_acc = fit_frame_oracle(&data.train).accuracy(&data.test);
    let (_, ed_acc) = fit_and_score(&ed_rf16(), &data.train, &data.test, 1);
    let (_, dilated_acc) = fit_and_score(&dilated_rf16(), &data.train, &data.test, 1);
    println!(
        "  frame-oracle accuracy {oracle_acc:.2}, ed-tcn {ed_acc:.2}, dilated {dilated_acc:.2}"
    );
    let pass = oracle_acc < ed_acc && oracle_acc < dilated_acc;
    verdict(3, "frame-wise oracle strictly below both nets", pass);
    assert!(
        pass,
        "a per-frame lookup should not beat models that see temporal context"
    );
}

// ---------------------------------------------------------------------------
// 4. Finite-difference audit of every backward pass.
//
// Each scalar objective is probed coordinate by coordinate with central
// differences at step 1e-3. Non-smooth coordinates (a max/ReLU boundary
// inside the probed interval) are detected from forward values alone: for a
// smooth function the second difference shrinks fourfold when the step
// halves, so a probe that breaks that scaling is skipped. Skips must stay
// rare; everything kept must agree to a relative error below 1e-4.
// ---------------------------------------------------------------------------

const FD_STEP: f64 = 1e-3;
const FD_TOL: f64 = 1e-4;
const FD_INSTANCES: usize = 20;

#[derive(Default)]
struct FdTally {
    checked: usize,
    skipped: usize,
    worst: f64,
}

impl FdTally {
    fn ok(&self) -> bool {
        let total = self.checked + self.skipped;
        self.checked > 0 && self.worst < FD_TOL && (self.skipped as f64) < 0.05 * total as f64
    }
}

/// Decides one coordinate from its seven forward values. `probes` holds the
/// objective at +h, -h, +h/2, -h/2, +h/4 and -h/4; `center` at the
/// unperturbed point. Returns the relative error against `analytic`, or
/// None when the difference quotient itself is unusable here.
///
/// Skips come in two forms, both judged from forward values alone so a
/// wrong gradient can never argue itself out of being checked:
///
/// * Kink proximity. A kink at distance delta from the center turns the
///   second difference s(step) into Delta * (step - delta), which mimics
///   the quadratic scaling s(h) = 4 * s(h/2) only at delta = h/3; no single
///   kink position mimics it at two scale pairs at once, so requiring both
///   pairs to scale quadratically rules kinks out.
/// * Extreme curvature (the normalized-ReLU quotient when a frame's maximum
///   sits near the epsilon floor). The h and h/2 difference quotients then
///   visibly disagree, which bounds the truncation error from below; when
///   even Richardson extrapolation cannot reach the tolerance the check is
///   inconclusive at this step size.
fn coordinate_result(center: f64, probes: [f64; 6], analytic: f64) -> Option<f64> {
    let s_full = probes[0] + probes[1] - 2.0 * center;
    let s_half = probes[2] + probes[3] - 2.0 * center;
    let s_quarter = probes[4] + probes[5] - 2.0 * center;
    let floor = 1e-12 * center.abs().max(1.0);
    let quadratic =
        |fine: f64, coarse: f64| (4.0 * fine - coarse).abs() <= 0.2 * coarse.abs() + floor;
    if !(quadratic(s_half, s_full) && quadratic(s_quarter, s_half)) {
        return None;
    }
    let numeric = (probes[0] - probes[1]) / (2.0 * FD_STEP);
    let numeric_half = (probes[2] - probes[3]) / FD_STEP;
    let err = rel_err(analytic, numeric);
    if err < FD_TOL {
        return Some(err);
    }
    // The step-1e-3 quotient missed: decide between its own truncation
    // error and a genuinely wrong gradient. Richardson extrapolation
    // cancels the quadratic truncation term.
    let extrapolated = (4.0 * numeric_half - numeric) / 3.0;
    let err = err.min(rel_err(analytic, extrapolated));
    let truncation = (4.0 / 3.0) * (numeric - numeric_half).abs();
    if err >= FD_TOL && truncation > 0.25 * FD_TOL * numeric.abs().max(1e-6) {
        return None;
    }
    Some(err)
}

/// Sweeps `count` coordinates of some state: `set` writes a trial value,
/// `get` reads the current one, `eval` recomputes the scalar objective and
/// `analytic(i)` is the gradient coordinate under test.
fn fd_sweep(
    count: usize,
    center: f64,
    get: impl Fn(usize) -> f64,
    set: impl Fn(usize, f64),
    eval: impl Fn() -> f64,
    analytic: impl Fn(usize) -> f64,
    tally: &mut FdTally,
) {
    for i in 0..count {
        let base = get(i);
        let mut probes = [0.0f64; 6];
        for (slot, scale) in [1.0, 0.5, 0.25].into_iter().enumerate() {
            for (side, sign) in [1.0, -1.0].into_iter().enumerate() {
                set(i, base + sign * scale * FD_STEP);
                probes[2 * slot + side] = eval();
            }
        }
        set(i, base);
        match coordinate_result(center, probes, analytic(i)) {
            None => tally.skipped += 1,
            Some(err) => {
                tally.checked += 1;
                tally.worst = tally.worst.max(err);
            }
        }
    }
}

fn dot(a: &SeqTensor, b: &SeqTensor) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| x * y)
        .sum()
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn fd_conv(rng: &mut ChaCha8Rng, tally: &mut FdTally) {
    for round in 0..FD_INSTANCES {
        let out_c = rng.gen_range(1..=3);
        let in_c = rng.gen_range(1..=3);
        let taps = rng.gen_range(1..=3);
        let frames = rng.gen_range(4..=9);
        let dilation = rng.gen_range(1..=3);
        let mode = if round % 2 == 0 {
            ConvMode::Causal
        } else {
            ConvMode::Acausal
        };
        let bank = ConvFilterBank::from_parts(
            out_c,
            in_c,
            taps,
            random_vec(rng, out_c * in_c * taps),
            random_vec(rng, out_c),
        )
        .unwrap();
        let x = random_tensor(rng, in_c, frames);
        let u = random_tensor(rng, out_c, frames);
        let (d_x, d_w, d_b) = temporal_conv_backward(&x, &bank, mode, dilation, &u).unwrap();

        let state = RefCell::new((x, bank));
        let eval = || {
            let s = state.borrow();
            dot(
                &temporal_conv_forward(&s.0, &s.1, mode, dilation).unwrap(),
                &u,
            )
        };
        let center = eval();
        fd_sweep(
            in_c * frames,
            center,
            |i| state.borrow().0.as_slice()[i],
            |i, v| state.borrow_mut().0.as_mut_slice()[i] = v,
            eval,
            |i| d_x.as_slice()[i],
            tally,
        );
        fd_sweep(
            d_w.len(),
            center,
            |i| state.borrow().1.weights[i],
            |i, v| state.borrow_mut().1.weights[i] = v,
            eval,
            |i| d_w[i],
            tally,
        );
        fd_sweep(
            d_b.len(),
            center,
            |i| state.borrow().1.bias[i],
            |i, v| state.borrow_mut().1.bias[i] = v,
            eval,
            |i| d_b[i],
            tally,
        );
    }
}

fn fd_dense(rng: &mut ChaCha8Rng, tally: &mut FdTally) {
    for _ in 0..FD_INSTANCES {
        let out_dim = rng.gen_range(1..=4);
        let in_dim = rng.gen_range(1..=4);
        let frames = rng.gen_range(2..=7);
        let mut layer = DenseLayer::zeros(out_dim, in_dim);
        layer.weights = random_vec(rng, out_dim * in_dim);
        layer.bias = random_vec(rng, out_dim);
        let x = random_tensor(rng, in_dim, frames);
        let u = random_tensor(rng, out_dim, frames);
        let (d_x, d_w, d_b) = dense_backward(&x, &layer, &u).unwrap();

        let state = RefCell::new((x, layer));
        let eval = || {
            let s = state.borrow();
            dot(&dense_forward(&s.0, &s.1).unwrap(), &u)
        };
        let center = eval();
        fd_sweep(
            in_dim * frames,
            center,
            |i| state.borrow().0.as_slice()[i],
            |i, v| state.borrow_mut().0.as_mut_slice()[i] = v,
            eval,
            |i| d_x.as_slice()[i],
            tally,
        );
        fd_sweep(
            d_w.len(),
            center,
            |i| state.borrow().1.weights[i],
            |i, v| state.borrow_mut().1.weights[i] = v,
            eval,
            |i| d_w[i],
            tally,
        );
        fd_sweep(
            d_b.len(),
            center,
            |i| state.borrow().1.bias[i],
            |i, v| state.borrow_mut().1.bias[i] = v,
            eval,
            |i| d_b[i],
            tally,
        );
    }
}

fn fd_pool(rng: &mut ChaCha8Rng, tally: &mut FdTally) {
    for _ in 0..FD_INSTANCES {
        let channels = rng.gen_range(1..=3);
        let frames = rng.gen_range(2..=9);
        let x = random_tensor(rng, channels, frames);
        let (pooled, indices) = max_pool_time(&x).unwrap();
        let u = random_tensor(rng, channels, pooled.frames());
        let d_x = max_pool_time_backward(&indices, &u).unwrap();

        let state = RefCell::new(x);
        let eval = || dot(&max_pool_time(&state.borrow()).unwrap().0, &u);
        let center = eval();
        fd_sweep(
            channels * frames,
            center,
            |i| state.borrow().as_slice()[i],
            |i, v| state.borrow_mut().as_mut_slice()[i] = v,
            eval,
            |i| d_x.as_slice()[i],
            tally,
        );
    }
}

fn fd_upsample(rng: &mut ChaCha8Rng, tally: &mut FdTally) {
    for _ in 0..FD_INSTANCES {
        let channels = rng.gen_range(1..=3);
        let frames = rng.gen_range(2..=6);
        let target = 2 * frames - usize::from(rng.gen::<bool>());
        let x = random_tensor(rng, channels, frames);
        let u = random_tensor(rng, channels, target);
        let d_x = upsample_time_backward(&u, frames).unwrap();

        let state = RefCell::new(x);
        let eval = || dot(&upsample_time(&state.borrow(), target).unwrap(), &u);
        let center = eval();
        fd_sweep(
            channels * frames,
            center,
            |i| state.borrow().as_slice()[i],
            |i, v| state.borrow_mut().as_mut_slice()[i] = v,
            eval,
            |i| d_x.as_slice()[i],
            tally,
        );
    }
}

fn fd_activation(kind: Activation, rng: &mut ChaCha8Rng, tally: &mut FdTally) {
    for _ in 0..FD_INSTANCES {
        let out_c = rng.gen_range(1..=3);
        let in_c = match kind {
            Activation::Gated => out_c * 2,
            _ => out_c,
        };
        let frames = rng.gen_range(2..=7);
        let x = random_tensor(rng, in_c, frames);
        let u = random_tensor(rng, out_c, frames);
        let d_x = activation_backward(&x, &u, kind).unwrap();

        let state = RefCell::new(x);
        let eval = || dot(&activation_forward(&state.borrow(), kind).unwrap(), &u);
        let center = eval();
        fd_sweep(
            in_c * frames,
            center,
            |i| state.borrow().as_slice()[i],
            |i, v| state.borrow_mut().as_mut_slice()[i] = v,
            eval,
            |i| d_x.as_slice()[i],
            tally,
        );
    }
}

fn fd_dropout(rng: &mut ChaCha8Rng, tally: &mut FdTally) {
    for _ in 0..FD_INSTANCES {
        let channels = rng.gen_range(2..=5);
        let frames = rng.gen_range(2..=7);
        let mask_seed = rng.gen::<u64>();
        let rate = 0.4;
        let x = random_tensor(rng, channels, frames);
        let u = random_tensor(rng, channels, frames);
        let (_, mask) =
            spatial_dropout(&x, rate, &mut ChaCha8Rng::seed_from_u64(mask_seed), true).unwrap();
        let d_x = dropout_backward(&u, &mask).unwrap();

        let state = RefCell::new(x);
        // Rebuilding the RNG from the same seed pins the mask, so the
        // objective stays deterministic across probes.
        let eval = || {
            let mut r = ChaCha8Rng::seed_from_u64(mask_seed);
            let (out, _) = spatial_dropout(&state.borrow(), rate, &mut r, true).unwrap();
            dot(&out, &u)
        };
        let center = eval();
        fd_sweep(
            channels * frames,
            center,
            |i| state.borrow().as_slice()[i],
            |i, v| state.borrow_mut().as_mut_slice()[i] = v,
            eval,
            |i| d_x.as_slice()[i],
            tally,
        );
    }
}

fn fd_softmax_cross_entropy(rng: &mut ChaCha8Rng, tally: &mut FdTally) {
    for round in 0..FD_INSTANCES {
        let classes = rng.gen_range(2..=4);
        let frames = rng.gen_range(2..=7);
        let logits = random_tensor(rng, classes, frames);
        let labels: Vec<usize> = (0..frames).map(|_| rng.gen_range(0..classes)).collect();
        let mask: Option<Vec<bool>> = if round % 2 == 0 {
            None
        } else {
            // Random mask with at least one counted frame.
            let mut m: Vec<bool> = (0..frames).map(|_| rng.gen::<bool>()).collect();
            m[rng.gen_range(0..frames)] = true;
            Some(m)
        };
        let (_, d_logits) =
            cross_entropy(&softmax_frames(&logits).unwrap(), &labels, mask.as_deref()).unwrap();

        let state = RefCell::new(logits);
        let eval = || {
            cross_entropy(
                &softmax_frames(&state.borrow()).unwrap(),
                &labels,
                mask.as_deref(),
            )
            .unwrap()
            .0
        };
        let center = eval();
        fd_sweep(
            classes * frames,
            center,
            |i| state.borrow().as_slice()[i],
            |i, v| state.borrow_mut().as_mut_slice()[i] = v,
            eval,
            |i| d_logits.as_slice()[i],
            tally,
        );
    }
}

fn random_activation(rng: &mut ChaCha8Rng) -> Activation {
    [
        Activation::Sigmoid,
        Activation::Relu,
        Activation::Tanh,
        Activation::Gated,
        Activation::NormRelu,
    ][rng.gen_range(0..5)]
}

fn flat_param(model: &TcnModel, flat: usize) -> f64 {
    let mut value = f64::NAN;
    let mut offset = 0usize;
    model.visit_params(&mut |_, _, vals| {
        if flat >= offset && flat < offset + vals.len() {
            value = vals[flat - offset];
        }
        offset += vals.len();
    });
    value
}

fn set_flat_param(model: &mut TcnModel, flat: usize, v: f64) {
    let mut offset = 0usize;
    model.visit_params_mut(&mut |_, _, vals| {
        if flat >= offset && flat < offset + vals.len() {
            vals[flat - offset] = v;
        }
        offset += vals.len();
    });
}

/// Whole-model audit: the training loss gradient for every parameter, then
/// the input gradient of a random logit projection.
fn fd_model(spec: ModelSpec, rng: &mut ChaCha8Rng, tally: &mut FdTally) {
    let model = TcnModel::build(spec, rng.gen()).unwrap();
    let frames = rng.gen_range(6..=12);
    let x = random_tensor(rng, model.input_dim(), frames);
    let labels: Vec<usize> = (0..frames)
        .map(|_| rng.gen_range(0..model.num_classes()))
        .collect();
    let (_, grads) = model.loss_gradients(&x, &labels).unwrap();
    let analytic: Vec<f64> = grads.groups.concat();

    let state = RefCell::new(model);
    let eval = || {
        let m = state.borrow();
        cross_entropy(&m.forward(&x).unwrap(), &labels, None)
            .unwrap()
            .0
    };
    let center = eval();
    fd_sweep(
        analytic.len(),
        center,
        |i| flat_param(&state.borrow(), i),
        |i, v| set_flat_param(&mut state.borrow_mut(), i, v),
        eval,
        |i| analytic[i],
        tally,
    );

    let model = state.into_inner();
    let u = random_tensor(rng, model.num_classes(), frames);
    let d_x = model.input_gradient(&x, &u).unwrap();
    let input = RefCell::new(x);
    let eval = || dot(&model.logits(&input.borrow()).unwrap(), &u);
    let center = eval();
    fd_sweep(
        model.input_dim() * frames,
        center,
        |i| input.borrow().as_slice()[i],
        |i, v| input.borrow_mut().as_mut_slice()[i] = v,
        eval,
        |i| d_x.as_slice()[i],
        tally,
    );
}

fn fd_ed_models(rng: &mut ChaCha8Rng, tally: &mut FdTally) {
    for _ in 0..FD_INSTANCES {
        let num_layers = rng.gen_range(1..=2);
        let mut spec = EdTcnSpec::new(
            rng.gen_range(2..=3),
            rng.gen_range(2..=4),
            num_layers,
            rng.gen_range(1..=3),
        );
        spec.filters = (0..num_layers).map(|_| rng.gen_range(2..=5)).collect();
        spec.activation = random_activation(rng);
        spec.causal = rng.gen();
        fd_model(ModelSpec::EdTcn(spec), rng, tally);
    }
}

fn fd_dilated_models(rng: &mut ChaCha8Rng, tally: &mut FdTally) {
    for _ in 0..FD_INSTANCES {
        let mut spec = DilatedTcnSpec::new(
            rng.gen_range(2..=3),
            rng.gen_range(2..=4),
            rng.gen_range(1..=2),
            rng.gen_range(1..=2),
        );
        spec.num_filters = rng.gen_range(3..=6);
        spec.activation = random_activation(rng);
        spec.causal = rng.gen();
        fd_model(ModelSpec::Dilated(spec), rng, tally);
    }
}

#[test]
fn acceptance_04_gradient_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut results: Vec<(String, FdTally)> = Vec::new();
    let mut run = |name: &str, body: &mut dyn FnMut(&mut ChaCha8Rng, &mut FdTally)| {
        let mut tally = FdTally::default();
        body(&mut rng, &mut tally);
        results.push((name.to_string(), tally));
    };
    run("temporal conv", &mut fd_conv);
    run("dense", &mut fd_dense);
    run("max pool", &mut fd_pool);
    run("upsample", &mut fd_upsample);
    for kind in [
        Activation::Sigmoid,
        Activation::Relu,
        Activation::Tanh,
        Activation::Gated,
        Activation::NormRelu,
    ] {
        run(&format!("activation {}", kind.name()), &mut |r, t| {
            fd_activation(kind, r, t)
        });
    }
    run("spatial dropout", &mut fd_dropout);
    run("softmax + cross-entropy", &mut fd_softmax_cross_entropy);
    run("end-to-end ed-tcn", &mut fd_ed_models);
    run("end-to-end dilated", &mut fd_dilated_models);

    let mut pass = true;
    for (name, tally) in &results {
        println!(
            "  {name}: {} coordinates, {} skipped near kinks, worst rel err {:.2e}",
            tally.checked, tally.skipped, tally.worst
        );
        pass &= tally.ok();
    }
    verdict(4, "finite-difference gradient suite", pass);
    assert!(
        pass,
        "every backward pass must match central differences to {FD_TOL:e} \
         with only scattered kink skips"
    );
}

// ---------------------------------------------------------------------------
// 5. The closed-form receptive fields against the measured gradient span.
//
// The footprint of one output frame is measured on causal models: seed an
// upstream gradient at a single probe frame and count the input frames whose
// gradient comes back nonzero (maximised over a few builds and inputs, since
// max-pool routing can hide frames for one particular input).
// ---------------------------------------------------------------------------

#[test]
fn acceptance_05_receptive_field_footprints() {
    const FRAMES: usize = 150;
    const PROBE: usize = 90;
    let mut probes: Vec<(String, usize, ModelSpec)> = Vec::new();
    for (d, l) in [(1usize, 1usize), (3, 2), (5, 3)] {
        let mut spec = EdTcnSpec::new(3, 4, l, d);
        spec.filters = vec![16; l];
        spec.activation = Activation::Tanh;
        spec.causal = true;
        probes.push((
            format!("ed-tcn d={d} L={l}"),
            receptive_field_ed(d, l),
            ModelSpec::EdTcn(spec),
        ));
    }
    for (b, l) in [(1usize, 2usize), (2, 3)] {
        let mut spec = DilatedTcnSpec::new(3, 4, b, l);
        spec.num_filters = 16;
        probes.push((
            format!("dilated B={b} L={l}"),
            receptive_field_dilated(b, l),
            ModelSpec::Dilated(spec),
        ));
    }

    let mut all_match = true;
    let mut future_clean = true;
    for (name, formula, spec) in &probes {
        let mut footprint = 0usize;
        for build_seed in [21u64, 22] {
            let model = TcnModel::build(spec.clone(), build_seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(500 + build_seed);
            for _ in 0..2 {
                let x = random_tensor(&mut rng, 3, FRAMES);
                let mut upstream = SeqTensor::zeros(4, FRAMES);
                for c in 0..4 {
                    upstream.set(c, PROBE, rng.gen_range(0.5..1.5));
                }
                let g = model.input_gradient(&x, &upstream).unwrap();
                let mut touched = 0usize;
                for t in 0..FRAMES {
                    if (0..3).any(|c| g.at(c, t) != 0.0) {
                        touched += 1;
                        if t > PROBE {
                            future_clean = false;
                        }
                    }
                }
                footprint = footprint.max(touched);
            }
        }
        let matched = footprint == *formula;
        all_match &= matched;
        println!(
            "  {name}: formula {formula}, measured {footprint}{}",
            if matched { "" } else { "  <- mismatch" }
        );
    }
    println!("  no gradient ever reached a future frame: {future_clean}");
    let pass = all_match && future_clean;
    verdict(5, "receptive-field footprint conformance", pass);
    assert!(
        pass,
        "the measured whole-model gradient span must equal the closed-form \
         receptive field for every probed configuration"
    );
}

// ---------------------------------------------------------------------------
// 6. The segmental matchers against brute-force oracles.
// ---------------------------------------------------------------------------

/// Two independent random tilings of the same timeline, each with 1 to 6
/// segments and no two adjacent segments sharing a class.
fn tiling_pair(rng: &mut ChaCha8Rng) -> (Vec<Segment>, Vec<Segment>) {
    let frames = rng.gen_range(20..=60);
    let side = |rng: &mut ChaCha8Rng| {
        let segments = rng.gen_range(1..=6);
        let mut cuts = BTreeSet::new();
        while cuts.len() < segments - 1 {
            cuts.insert(rng.gen_range(1..frames));
        }
        let mut bounds = vec![0usize];
        bounds.extend(cuts);
        bounds.push(frames);
        let mut out: Vec<Segment> = Vec::with_capacity(segments);
        let mut prev = usize::MAX;
        for pair in bounds.windows(2) {
            let class = loop {
                let c = rng.gen_range(0..3usize);
                if c != prev {
                    break c;
                }
            };
            out.push(Segment::new(class, pair[0], pair[1]));
            prev = class;
        }
        out
    };
    (side(rng), side(rng))
}

#[test]
fn acceptance_06_segmental_metric_oracles() {
    const TAUS: [f64; 3] = [0.1, 0.25, 0.5];
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut f1_mismatches = 0usize;
    let mut edit_mismatches = 0usize;
    for _ in 0..1000 {
        let (pred, truth) = tiling_pair(&mut rng);
        for tau in TAUS {
            let got = f1_counts(&pred, &truth, tau, &[]).unwrap();
            let want = exhaustive_counts(&pred, &truth, tau);
            if (got.tp, got.fp, got.fn_) != want {
                f1_mismatches += 1;
            }
        }
        let p: Vec<usize> = pred.iter().map(|s| s.class_id).collect();
        let t: Vec<usize> = truth.iter().map(|s| s.class_id).collect();
        let dist = levenshtein_matrix(&p, &t);
        let want = 100.0 * (1.0 - dist as f64 / p.len().max(t.len()) as f64);
        if edit_score(&pred, &truth, &[]) != want {
            edit_mismatches += 1;
        }
    }
    let hand = f1_at_k(
        &[
            Segment::new(0, 0, 5),
            Segment::new(0, 5, 10),
            Segment::new(1, 10, 20),
        ],
        &[Segment::new(0, 0, 10), Segment::new(1, 10, 20)],
        0.5,
        &[],
    )
    .unwrap();
    println!("  greedy vs exhaustive matcher: {f1_mismatches} mismatches in 3000 checks");
    println!("  edit score vs full-matrix oracle: {edit_mismatches} mismatches in 1000 checks");
    println!("  hand-worked split case: F1@50 = {hand}");
    let pass = f1_mismatches == 0 && edit_mismatches == 0 && hand == 80.0;
    verdict(6, "segmental metric oracles", pass);
    assert!(
        pass,
        "the shipped matchers must agree exactly with the brute-force oracles"
    );
}

// ---------------------------------------------------------------------------
// 7. Behavioral properties of the metrics.
// ---------------------------------------------------------------------------

#[test]
fn acceptance_07_metric_properties() {
    const TAUS: [f64; 3] = [0.1, 0.25, 0.5];
    let mut rng = ChaCha8Rng::seed_from_u64(707);

    // Splitting one correctly predicted segment in two always costs F1: the
    // second piece can never claim another truth segment.
    let mut splitting_penalized = true;
    for _ in 0..50 {
        let (truth, _) = tiling_pair(&mut rng);
        let victim = loop {
            let i = rng.gen_range(0..truth.len());
            if truth[i].len() >= 2 {
                break i;
            }
        };
        let mut pred = truth.clone();
        let s = &truth[victim];
        let cut = rng.gen_range(s.start + 1..s.end);
        pred.splice(
            victim..=victim,
            [
                Segment::new(s.class_id, s.start, cut),
                Segment::new(s.class_id, cut, s.end),
            ],
        );
        for tau in TAUS {
            let whole = f1_at_k(&truth, &truth, tau, &[]).unwrap();
            let split = f1_at_k(&pred, &truth, tau, &[]).unwrap();
            splitting_penalized &= split < whole;
        }
    }

    // Doubling the frame rate rescales every segment but changes no metric.
    let mut upsampling_invariant = true;
    for _ in 0..100 {
        let (pred, truth) = tiling_pair(&mut rng);
        let doubled = |segs: &[Segment]| -> Vec<Segment> {
            segs.iter()
                .map(|s| Segment::new(s.class_id, 2 * s.start, 2 * s.end))
                .collect()
        };
        let (pred2, truth2) = (doubled(&pred), doubled(&truth));
        for tau in TAUS {
            let a = f1_counts(&pred, &truth, tau, &[]).unwrap();
            let b = f1_counts(&pred2, &truth2, tau, &[]).unwrap();
            upsampling_invariant &= (a.tp, a.fp, a.fn_) == (b.tp, b.fp, b.fn_);
        }
        upsampling_invariant &= edit_score(&pred, &truth, &[]) == edit_score(&pred2, &truth2, &[]);
    }

    // Confidence pooling must be able to change the detection ranking: a
    // flat correct segment against a spiky false positive. Mean pooling
    // ranks the correct one first (AP 100); max pooling promotes the spike
    // (AP 50).
    let truth = vec![Segment::new(0, 0, 10)];
    let pred = vec![Segment::new(0, 0, 10), Segment::new(0, 20, 30)];
    let mut probs = SeqTensor::zeros(2, 40);
    for t in 0..40 {
        let p = if t < 10 {
            0.6
        } else if (20..30).contains(&t) {
            if t == 25 {
                0.95
            } else {
                0.3
            }
        } else {
            0.05
        };
        probs.set(0, t, p);
        probs.set(1, t, 1.0 - p);
    }
    let mean_map = map_detection(
        &attach_confidences(&probs, &pred, ConfidencePolicy::Mean).unwrap(),
        &truth,
        MatchCriterion::Iou(0.5),
    )
    .unwrap();
    let max_map = map_detection(
        &attach_confidences(&probs, &pred, ConfidencePolicy::Max).unwrap(),
        &truth,
        MatchCriterion::Iou(0.5),
    )
    .unwrap();
    let pooling_sensitive = mean_map == 100.0 && max_map == 50.0;

    println!("  splitting strictly lowers F1: {splitting_penalized}");
    println!("  2x upsampling leaves F1 and edit unchanged: {upsampling_invariant}");
    println!("  pooling sensitivity: mean mAP {mean_map}, max mAP {max_map}");
    let pass = splitting_penalized && upsampling_invariant && pooling_sensitive;
    verdict(7, "metric behavioral properties", pass);
    assert!(pass);
}

// ---------------------------------------------------------------------------
// 8. Bit-level reproducibility of training and the model file.
// ---------------------------------------------------------------------------

#[test]
fn acceptance_08_determinism_and_serialization() {
    let _guard = heavy_lock();
    let data = gen_composition(&CompositionSpec {
        num_train: 6,
        num_test: 2,
        seq_len: 60,
        seed: 11,
        ..CompositionSpec::default()
    })
    .expect("generator");
    let cfg = TrainConfig {
        epochs: 8,
        seed: 7,
        ..TrainConfig::default()
    };

    let mut ed = EdTcnSpec::new(FEATURE_DIM, NUM_CLASSES, 2, 3);
    ed.filters = vec![4, 6];
    let mut dilated = DilatedTcnSpec::new(FEATURE_DIM, NUM_CLASSES, 1, 2);
    dilated.num_filters = 6;

    let dir = tempfile::tempdir().expect("temp dir");
    let mut pass = true;
    for (name, spec) in [
        ("ed-tcn", ModelSpec::EdTcn(ed)),
        ("dilated", ModelSpec::Dilated(dilated)),
    ] {
        let mut first = TcnModel::build(spec.clone(), cfg.seed).unwrap();
        let report_a = train(&mut first, &data.train, &cfg).unwrap();
        let mut second = TcnModel::build(spec.clone(), cfg.seed).unwrap();
        let report_b = train(&mut second, &data.train, &cfg).unwrap();
        let repeatable = first == second && report_a.loss_curve == report_b.loss_curve;

        let path_a = dir.path().join(format!("{name}-a.tcnm"));
        let path_b = dir.path().join(format!("{name}-b.tcnm"));
        save_model(&first, &path_a).unwrap();
        let loaded = load_model(&path_a).unwrap();
        save_model(&loaded, &path_b).unwrap();
        let bytes_stable = std::fs::read(&path_a).unwrap() == std::fs::read(&path_b).unwrap();
        let model_stable = loaded == first;
        let probe = &data.test[0].0;
        let forward_stable =
            loaded.forward(probe).unwrap().as_slice() == first.forward(probe).unwrap().as_slice();

        println!(
            "  {name}: retrain identical {repeatable}, file round-trip identical \
             {model_stable}, bytes stable {bytes_stable}, forward stable {forward_stable}"
        );
        pass &= repeatable && bytes_stable && model_stable && forward_stable;
    }
    verdict(8, "bit-identical training and model files", pass);
    assert!(pass);
}

// ---------------------------------------------------------------------------
// 9. Scope statement for benchmarks this suite cannot run.
// ---------------------------------------------------------------------------

#[test]
fn acceptance_09_real_dataset_benchmarks_out_of_scope() {
    // Published benchmark numbers on recorded video datasets depend on
    // precomputed per-frame CNN features that are not redistributable with
    // this repository, so no test here attempts them. The synthetic
    // experiments (1-3) and the oracle/property suites (4-8) are the
    // evidence this repository ships instead.
    verdict(9, "real-dataset benchmarks out of scope by design", true);
}
