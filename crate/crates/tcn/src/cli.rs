//! The `tcn` command-line tool: synthetic data generation, training,
//! prediction, evaluation, hyperparameter sweeps, receptive-field lookup and
//! timeline rendering. Every command is deterministic given its seed; the
//! only tunable parallelism is the sweep worker pool (capped by the
//! `TCN_THREADS` environment variable).

use crate::error::TcnError;
use crate::io::{
    parse_tau_list, read_features, read_labels, write_features_binary, write_labels,
    write_split_dataset, DatasetManifest, RunConfig, Split,
};
use crate::metrics::{evaluate_dataset, EvalSettings};
use crate::models::{
    load_model, receptive_field_dilated, receptive_field_ed, save_model, train, TcnModel,
};
use crate::synth::{gen_composition, gen_shift, CompositionSpec, ShiftSpec, CLASS_NAMES};
use crate::timeline::{render_ascii, render_svg, TimelineRow};
use crate::{LabelSequence, LabelledSequence, SeqTensor};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "tcn",
    version,
    about = "Temporal convolutional networks for frame-wise action segmentation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset (features, labels, manifest).
    Synth(SynthArgs),
    /// Train a model on a dataset split and save it.
    Train(TrainArgs),
    /// Run a saved model over a split, writing labels and probabilities.
    Predict(PredictArgs),
    /// Score predictions against a dataset split.
    Eval(EvalArgs),
    /// Train one model per hyperparameter value and tabulate the scores.
    Sweep(SweepArgs),
    /// Print the receptive field of an architecture in frames.
    Rf(RfArgs),
    /// Render truth and prediction label files as timeline bars.
    Timeline(TimelineArgs),
}

/// Parses the process arguments, runs one command, returns its outcome.
pub fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Synth(args) => cmd_synth(args),
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Rf(args) => cmd_rf(args),
        Command::Timeline(args) => cmd_timeline(args),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SynthKind {
    /// Markov chains over five actions with fixed durations.
    Composition,
    /// The same chains with features delayed by --shift frames.
    Shift,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory for the dataset.
    #[arg(long)]
    out: PathBuf,
    /// Which generator to run.
    #[arg(long, value_enum, default_value = "composition")]
    spec: SynthKind,
    /// Feature delay in frames (only with --spec shift).
    #[arg(long)]
    shift: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    num_train: usize,
    #[arg(long, default_value_t = 10)]
    num_test: usize,
    /// Frames per sequence.
    #[arg(long, default_value_t = 150)]
    len: usize,
    /// Write features as CSV text instead of binary.
    #[arg(long)]
    csv: bool,
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let base = CompositionSpec {
        num_train: args.num_train,
        num_test: args.num_test,
        seq_len: args.len,
        seed: args.seed,
        ..CompositionSpec::default()
    };
    let data = match (args.spec, args.shift) {
        (SynthKind::Composition, None) => gen_composition(&base)?,
        (SynthKind::Composition, Some(_)) => {
            bail!("--shift needs --spec shift")
        }
        (SynthKind::Shift, shift) => {
            let spec = ShiftSpec {
                base,
                shift: shift.ok_or_else(|| TcnError::config("--spec shift needs --shift"))?,
            };
            gen_shift(&spec)?
        }
    };
    let classes: Vec<String> = CLASS_NAMES.iter().map(|s| s.to_string()).collect();
    write_split_dataset(&args.out, &data.train, &data.test, &classes, !args.csv)?;
    println!(
        "wrote {} train + {} test sequences to {}",
        data.train.len(),
        data.test.len(),
        args.out.display()
    );
    Ok(())
}

#[derive(Args)]
struct TrainArgs {
    /// Run configuration file (key=value lines).
    #[arg(long)]
    config: PathBuf,
    /// Dataset directory containing manifest.txt.
    #[arg(long)]
    data: PathBuf,
    /// Where to write the trained model.
    #[arg(long)]
    out: PathBuf,
}

fn load_dataset_split(
    dir: &Path,
    split: Split,
) -> Result<(DatasetManifest, Vec<LabelledSequence>)> {
    let manifest = DatasetManifest::read(dir.join("manifest.txt"))?;
    let data = manifest.load_split(dir, split)?;
    if data.is_empty() {
        bail!("{} has no {split} sequences", dir.display());
    }
    Ok((manifest, data))
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let cfg = RunConfig::read(&args.config)?;
    if cfg.epochs == 0 {
        bail!("epochs must be at least 1");
    }
    let (manifest, data) = load_dataset_split(&args.data, Split::Train)?;
    let spec = cfg.model_spec(manifest.feature_dim, manifest.num_classes())?;
    let mut model = TcnModel::build(spec, cfg.seed)?;
    println!(
        "training {} ({} parameters, receptive field {} frames) on {} sequences",
        cfg.model,
        model.num_params(),
        model.receptive_field(),
        data.len()
    );
    let started = Instant::now();
    let report = train(&mut model, &data, &cfg.train_config())?;
    save_model(&model, &args.out)?;

    let mut log = String::from("epoch,loss\n");
    for (i, loss) in report.loss_curve.iter().enumerate() {
        log.push_str(&format!("{},{loss}\n", i + 1));
    }
    let log_path = sibling_path(&args.out, ".loss.csv");
    fs::write(&log_path, log).with_context(|| format!("cannot write {}", log_path.display()))?;

    println!(
        "{} epochs in {:.1}s, final loss {:.6}",
        cfg.epochs,
        started.elapsed().as_secs_f64(),
        report.loss_curve.last().copied().unwrap_or(f64::NAN)
    );
    println!("model: {}", args.out.display());
    println!("loss curve: {}", log_path.display());
    Ok(())
}

/// `model.tcnm` -> `model.tcnm.loss.csv`; keeps artifacts next to the model.
fn sibling_path(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

#[derive(Args)]
struct PredictArgs {
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,
    /// Dataset directory containing manifest.txt.
    #[arg(long)]
    data: PathBuf,
    /// Which split to predict.
    #[arg(long, default_value = "test", value_parser = parse_split)]
    split: Split,
    /// Output directory for per-sequence predictions.
    #[arg(long)]
    out: PathBuf,
}

fn parse_split(s: &str) -> std::result::Result<Split, String> {
    Split::parse(s).ok_or_else(|| format!("unknown split {s:?} (expected train, val or test)"))
}

/// File stems of one split's sequences, in manifest order.
fn split_stems(manifest: &DatasetManifest, split: Split) -> Vec<String> {
    manifest
        .sequences
        .iter()
        .filter(|r| r.split == split)
        .map(|r| {
            Path::new(&r.features)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| r.features.clone())
        })
        .collect()
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let (manifest, data) = load_dataset_split(&args.data, args.split)?;
    let stems = split_stems(&manifest, args.split);
    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    for (stem, (x, _)) in stems.iter().zip(&data) {
        let probs = model.forward(x)?;
        let labels = model.predict_labels(x)?;
        write_labels(&labels, args.out.join(format!("{stem}.labels")))?;
        write_features_binary(&probs, args.out.join(format!("{stem}.probs.tcnf")))?;
    }
    println!(
        "wrote {} predictions to {}",
        stems.len(),
        args.out.display()
    );
    Ok(())
}

#[derive(Args)]
struct EvalArgs {
    /// Dataset directory holding the ground truth manifest.
    #[arg(long)]
    truth: PathBuf,
    /// Directory of predictions (from `tcn predict`).
    #[arg(long)]
    pred: PathBuf,
    /// Which split the predictions cover.
    #[arg(long, default_value = "test", value_parser = parse_split)]
    split: Split,
    /// Overlap thresholds, percent or fractions.
    #[arg(long, default_value = "10,25,50")]
    tau: String,
    /// Class id excluded from segmental scoring.
    #[arg(long)]
    background_id: Option<usize>,
    /// Also write the report here (.json for JSON, anything else for text).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// (prediction, truth) label pairs plus per-sequence class probabilities
/// when every sequence has them.
type LoadedPredictions = (Vec<(LabelSequence, LabelSequence)>, Option<Vec<SeqTensor>>);

/// Pairs each truth sequence with `<stem>.labels` (and `<stem>.probs.tcnf`
/// when present) from the prediction directory.
fn load_predictions(
    pred_dir: &Path,
    stems: &[String],
    truths: &[LabelledSequence],
) -> Result<LoadedPredictions> {
    let mut pairs = Vec::with_capacity(stems.len());
    let mut probs = Vec::new();
    for (stem, (_, truth)) in stems.iter().zip(truths) {
        let labels = read_labels(pred_dir.join(format!("{stem}.labels")))?;
        pairs.push((labels, truth.clone()));
        let probs_path = pred_dir.join(format!("{stem}.probs.tcnf"));
        if probs_path.exists() {
            probs.push(read_features(probs_path)?);
        }
    }
    let probs = match probs.len() {
        0 => None,
        n if n == stems.len() => Some(probs),
        n => bail!(
            "{} of {} sequences have .probs.tcnf files; need all or none",
            n,
            stems.len()
        ),
    };
    Ok((pairs, probs))
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let (manifest, truths) = load_dataset_split(&args.truth, args.split)?;
    let stems = split_stems(&manifest, args.split);
    let (pairs, probs) = load_predictions(&args.pred, &stems, &truths)?;
    let settings = EvalSettings {
        taus: parse_tau_list(&args.tau)?,
        background: args.background_id,
    };
    let report = evaluate_dataset(&pairs, probs.as_deref(), &settings)?;
    print!("{}", report.to_text());
    if let Some(out) = &args.out {
        let body = if out.extension().is_some_and(|e| e == "json") {
            report.to_json()
        } else {
            report.to_text()
        };
        fs::write(out, body).with_context(|| format!("cannot write {}", out.display()))?;
        println!("report: {}", out.display());
    }
    Ok(())
}

#[derive(Args)]
struct SweepArgs {
    /// Hyperparameter to vary: d, L, B or fw.
    #[arg(long)]
    param: String,
    /// Comma-separated values to try.
    #[arg(long)]
    values: String,
    /// Base run configuration; the swept key is overridden per run.
    #[arg(long)]
    config: PathBuf,
    /// Dataset directory containing manifest.txt.
    #[arg(long)]
    data: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

struct SweepRow {
    value: usize,
    outcome: Result<(usize, f64, f64)>,
}

fn sweep_run(
    base: &RunConfig,
    param: &str,
    value: usize,
    manifest: &DatasetManifest,
    train_data: &[LabelledSequence],
    test_data: &[LabelledSequence],
) -> Result<(usize, f64, f64)> {
    let mut cfg = base.clone();
    match param {
        "d" => cfg.duration = Some(value),
        "L" => cfg.num_layers = Some(value),
        "B" => cfg.num_blocks = Some(value),
        "fw" => cfg.num_filters = Some(value),
        other => bail!("unknown sweep parameter {other:?} (expected d, L, B or fw)"),
    }
    let spec = cfg.model_spec(manifest.feature_dim, manifest.num_classes())?;
    let rf = spec.receptive_field();
    let mut model = TcnModel::build(spec, cfg.seed)?;
    train(&mut model, train_data, &cfg.train_config())?;
    let mut pairs = Vec::with_capacity(test_data.len());
    for (x, y) in test_data {
        pairs.push((model.predict_labels(x)?, y.clone()));
    }
    let settings = EvalSettings {
        taus: vec![0.25],
        background: cfg.background_id,
    };
    let report = evaluate_dataset(&pairs, None, &settings)?;
    Ok((rf, report.f1[0].1, report.frame_accuracy))
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let base = RunConfig::read(&args.config)?;
    let values: Vec<usize> = args
        .values
        .split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| TcnError::config(format!("bad sweep value {v:?}")))
        })
        .collect::<std::result::Result<_, _>>()?;
    if values.is_empty() {
        bail!("--values is empty");
    }
    let (manifest, train_data) = load_dataset_split(&args.data, Split::Train)?;
    let test_data = manifest.load_split(&args.data, Split::Test)?;
    if test_data.is_empty() {
        bail!("{} has no test sequences to score", args.data.display());
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(sweep_threads()?)
        .build()
        .context("cannot build sweep worker pool")?;
    let rows: Vec<SweepRow> = pool.install(|| {
        use rayon::prelude::*;
        values
            .par_iter()
            .map(|&value| SweepRow {
                value,
                outcome: sweep_run(
                    &base,
                    &args.param,
                    value,
                    &manifest,
                    &train_data,
                    &test_data,
                ),
            })
            .collect()
    });

    let mut csv = String::from("value,receptive_field,f1_25,accuracy,status\n");
    for row in &rows {
        match &row.outcome {
            Ok((rf, f1, acc)) => {
                csv.push_str(&format!("{},{rf},{f1:.4},{acc:.4},ok\n", row.value));
                println!(
                    "{}={}: rf {rf} f1@25 {f1:.2} acc {acc:.2}",
                    args.param, row.value
                );
            }
            Err(e) => {
                csv.push_str(&format!(
                    "{},,,,{}\n",
                    row.value,
                    format!("{e:#}").replace(',', ";")
                ));
                println!("{}={}: failed: {e:#}", args.param, row.value);
            }
        }
    }
    fs::write(&args.out, csv).with_context(|| format!("cannot write {}", args.out.display()))?;
    println!("results: {}", args.out.display());
    Ok(())
}

/// Worker count for the sweep pool: `TCN_THREADS` when set, rayon's default
/// otherwise (0 tells rayon to pick).
fn sweep_threads() -> Result<usize> {
    match std::env::var("TCN_THREADS") {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| TcnError::config(format!("bad TCN_THREADS value {v:?}")))?;
            if n == 0 {
                bail!("TCN_THREADS must be at least 1");
            }
            Ok(n)
        }
        Err(_) => Ok(0),
    }
}

#[derive(Args)]
struct RfArgs {
    /// Architecture: ed or dilated.
    #[arg(long)]
    model: String,
    /// Encoder depth (ed) or layers per block (dilated).
    #[arg(long, short = 'L')]
    layers: usize,
    /// Filter duration in frames (ed only).
    #[arg(long, short = 'd')]
    duration: Option<usize>,
    /// Block count (dilated only).
    #[arg(long, short = 'B')]
    blocks: Option<usize>,
}

fn cmd_rf(args: RfArgs) -> Result<()> {
    let rf = match args.model.as_str() {
        "ed" | "ed_tcn" => {
            if args.blocks.is_some() {
                bail!("-B only applies to --model dilated");
            }
            let d = args
                .duration
                .ok_or_else(|| TcnError::config("--model ed needs -d"))?;
            receptive_field_ed(d, args.layers)
        }
        "dilated" | "dilated_tcn" => {
            if args.duration.is_some() {
                bail!("-d only applies to --model ed");
            }
            let b = args
                .blocks
                .ok_or_else(|| TcnError::config("--model dilated needs -B"))?;
            receptive_field_dilated(b, args.layers)
        }
        other => bail!("unknown model {other:?} (expected ed or dilated)"),
    };
    println!("{rf}");
    Ok(())
}

#[derive(Args)]
struct TimelineArgs {
    /// Ground-truth label file.
    #[arg(long)]
    truth: PathBuf,
    /// Prediction label files, one row each (repeatable).
    #[arg(long, required = true)]
    pred: Vec<PathBuf>,
    /// Output file; .svg renders SVG, .txt renders text.
    #[arg(long)]
    out: PathBuf,
    /// Column budget for text rendering.
    #[arg(long, default_value_t = 100)]
    width: usize,
}

fn cmd_timeline(args: TimelineArgs) -> Result<()> {
    let mut rows = vec![TimelineRow::new("truth", read_labels(&args.truth)?)];
    for path in &args.pred {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        rows.push(TimelineRow::new(name, read_labels(path)?));
    }
    let body = match args.out.extension().and_then(|e| e.to_str()) {
        Some("svg") => render_svg(&rows)?,
        Some("txt") | Some("text") => render_ascii(&rows, args.width)?,
        _ => bail!(
            "cannot infer a format from {:?}; use a .svg or .txt extension",
            args.out
        ),
    };
    fs::write(&args.out, body).with_context(|| format!("cannot write {}", args.out.display()))?;
    println!("timeline: {}", args.out.display());
    Ok(())
}
