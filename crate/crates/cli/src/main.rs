//! `noisebits` command-line tool.
//!
//! Exit codes: 0 success, 1 I/O or internal error, 2 invalid arguments or
//! values, 3 unreadable configuration or input files, 4 every sweep cell failed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use noisebits::audio::{mel_spectrogram, read_wav, write_tensor_file, MelConfig};
use noisebits::bits::{write_bits_csv, Baseline, BitBudgetModel, SumConstant};
use noisebits::helmholtz::{estimate_noise_scalar, synthesize_readings, ContentSource, SensorModel, DEFAULT_KNEE_TOLERANCE};
use noisebits::image::{read_png, read_raw_rgb, transcode_image, write_png, write_raw_rgb, ImageRgb};
use noisebits::learner::{count_params, save_checkpoint, train, Network, TrainConfig};
use noisebits::plot::{render_plot, PlotKind, PlotSpec};
use noisebits::sweep::{
    load_audio_dataset, load_cifar10, prepare_audio, prepare_images, read_sweep_csv, run_sweep, summarize, synthetic_knee_images,
    ArchRef, DatasetKind, DatasetRef, Domain, ImageDataset, SweepConfig,
};
use noisebits::Error;

#[derive(Parser)]
#[command(name = "noisebits", version, about = "Perceptual-compression sweeps and bit-budget tools")]
struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for every random choice the command makes.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Bits lost and remaining per JPEG quality, or the quality for a budget.
    Bits(BitsArgs),
    /// Run a quality sweep described by a JSON config.
    Sweep { config: PathBuf },
    /// Simulate sensor readings and estimate the noise scalar.
    Synth(SynthArgs),
    /// Render a chart from a sweep CSV.
    Plot(PlotArgs),
    /// JPEG-transcode one image (PNG, or raw `.rgb`).
    Transcode {
        input: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=100))]
        quality: u8,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Mel spectrogram of a mono 16-bit WAV, written as a tensor file.
    Melspec {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = 96)]
        mels: usize,
    },
    /// Train one model at one quality from a JSON config.
    Train { config: PathBuf },
    /// Fit the accuracy curve and knee for each architecture in a sweep CSV.
    Fit {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_KNEE_TOLERANCE)]
        tolerance: f64,
        #[arg(long, value_enum, default_value_t = DomainArg::Image)]
        domain: DomainArg,
    },
}

#[derive(Args)]
struct BitsArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=100), conflicts_with = "target")]
    quality: Option<u8>,
    /// Remaining bits per pixel to find a quality for.
    #[arg(long)]
    target: Option<f64>,
    /// Use the table sum computed from the Annex K tables.
    #[arg(long)]
    annex_k: bool,
    /// 24-bit RGB baseline instead of 16-bit 4:2:0.
    #[arg(long)]
    full_rgb: bool,
    /// Decimal places in the CSV table.
    #[arg(long, default_value_t = 2)]
    decimals: usize,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 2.0)]
    n: f64,
    #[arg(long, default_value_t = 100.0)]
    r_max: f64,
    /// Gaussian jitter as a fraction of r_max.
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,
    /// Comma-separated symbol probabilities (default: 4 equiprobable symbols).
    #[arg(long, value_delimiter = ',')]
    probs: Option<Vec<f64>>,
    #[arg(long, default_value_t = 10_000)]
    count: usize,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    overlay: bool,
    #[arg(long, default_value = "")]
    title: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    AccuracyVsQ,
    EpochsVsQ,
    AccuracyVsParams,
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    Image,
    Audio,
}

/// Config for `train`.
#[derive(Debug, Serialize, Deserialize)]
struct TrainJob {
    dataset: DatasetRef,
    arch: ArchRef,
    /// JPEG quality (image) or `Q` (audio).
    quality: f64,
    #[serde(default)]
    train: TrainConfig,
    #[serde(default)]
    checkpoint: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidInput(_)
            | Error::InvalidQuality(_)
            | Error::InvalidAudioQuality(_)
            | Error::UnreachableTarget { .. }
            | Error::InvalidDistribution(_)
            | Error::UndefinedNoise
            | Error::InsufficientPoints { .. }
            | Error::DegenerateFit(_) => 2,
            Error::Config(_)
            | Error::Json(_)
            | Error::Csv(_)
            | Error::MissingColumn(_)
            | Error::MissingFile(_)
            | Error::UnsupportedFormat(_)
            | Error::Truncated(_)
            | Error::Dataset(_)
            | Error::ShapeMismatch(_) => 3,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = Result<(), Failure>;

fn emit(json: bool, value: serde_json::Value, text: String) {
    if json {
        println!("{value}");
    } else {
        print!("{text}");
    }
}

fn cmd_bits(a: &BitsArgs, json: bool) -> CmdResult {
    let model = BitBudgetModel {
        sum_constant: if a.annex_k { SumConstant::AnnexK } else { SumConstant::Published },
        baseline: if a.full_rgb { Baseline::Full24 } else { Baseline::Subsampled16 },
    };
    if let Some(t) = a.target {
        let q = model.quality_for_bits(t)?;
        emit(json, json!({ "target": t, "quality": q }), format!("{q}\n"));
        return Ok(());
    }
    let qs: Vec<u8> = match a.quality {
        Some(q) => vec![q],
        None => (1..=100).collect(),
    };
    let rows = model.table(qs)?;
    if json {
        println!("{}", serde_json::to_string(&rows).map_err(Error::from)?);
    } else {
        write_bits_csv(&rows, std::io::stdout().lock(), a.decimals)?;
    }
    Ok(())
}

fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|_| Error::MissingFile(path.to_path_buf()))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())).into())
}

fn cmd_sweep(config: &Path, seed: Option<u64>, json: bool) -> CmdResult {
    let mut cfg: SweepConfig = read_config(config)?;
    if let Some(s) = seed {
        cfg.dataset.seed = s;
    }
    cfg.validate()?;
    let r = run_sweep(&cfg)?;
    let ok = r.records.len() - r.failed;
    emit(
        json,
        json!({ "records": r.records.len(), "ok": ok, "failed": r.failed, "trained": r.trained, "output_dir": cfg.output_dir }),
        format!(
            "{} cells ({} ok, {} failed, {} trained now); results in {}\n",
            r.records.len(),
            ok,
            r.failed,
            r.trained,
            cfg.output_dir.display()
        ),
    );
    if r.all_failed() {
        return Err(Failure { code: 4, message: "every sweep cell failed".into() });
    }
    Ok(())
}

fn cmd_synth(a: &SynthArgs, seed: u64, json: bool) -> CmdResult {
    let source = match &a.probs {
        Some(p) => ContentSource::new(p.clone())?,
        None => ContentSource::uniform(4)?,
    };
    let model = SensorModel::new(a.r_max, a.n, a.jitter)?;
    let readings = synthesize_readings(&model, &source, a.count, seed)?;
    let est = estimate_noise_scalar(&readings, a.r_max, source.entropy())?;
    let rel = if a.n == 0.0 { est.abs() } else { (est - a.n).abs() / a.n };
    emit(
        json,
        json!({ "n_true": a.n, "n_approx": est, "relative_error": rel, "entropy_bits": source.entropy(), "readings": a.count, "seed": seed }),
        format!("n_true {}\nn_approx {est}\nrelative_error {rel}\n", a.n),
    );
    Ok(())
}

fn cmd_plot(a: &PlotArgs) -> CmdResult {
    let kind = match a.kind {
        KindArg::AccuracyVsQ => PlotKind::AccuracyVsQ,
        KindArg::EpochsVsQ => PlotKind::EpochsVsQ,
        KindArg::AccuracyVsParams => PlotKind::AccuracyVsParams,
    };
    render_plot(&PlotSpec { kind, overlay: a.overlay, input: a.input.clone(), output: a.output.clone(), title: a.title.clone() })?;
    Ok(())
}

fn is_png(p: &Path) -> bool {
    p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

fn cmd_transcode(input: &Path, quality: u8, output: Option<&Path>, json: bool) -> CmdResult {
    let img: ImageRgb = if is_png(input) { read_png(input)? } else { read_raw_rgb(input)? };
    let (out, stats) = transcode_image(&img, quality)?;
    if let Some(o) = output {
        if is_png(o) {
            write_png(o, &out)?;
        } else {
            write_raw_rgb(o, &out)?;
        }
    }
    emit(
        json,
        serde_json::to_value(stats).map_err(Error::from)?,
        format!(
            "quality {}\ncoefficient_entropy {:.6}\nnonzero_fraction {:.6}\npsnr_db {:.4}\n",
            stats.quality, stats.coefficient_entropy, stats.nonzero_fraction, stats.psnr_db
        ),
    );
    Ok(())
}

fn cmd_melspec(input: &Path, output: &Path, mels: usize, json: bool) -> CmdResult {
    let signal = read_wav(input)?;
    let cfg = MelConfig { n_mels: mels, ..Default::default() };
    let mel = mel_spectrogram(&signal, &cfg)?;
    write_tensor_file(output, &[mel.n_mels(), mel.frames()], mel.values())?;
    emit(
        json,
        json!({ "mels": mel.n_mels(), "frames": mel.frames(), "output": output }),
        format!("{} mel bands x {} frames -> {}\n", mel.n_mels(), mel.frames(), output.display()),
    );
    Ok(())
}

fn cmd_train(config: &Path, seed: Option<u64>, json: bool) -> CmdResult {
    let mut job: TrainJob = read_config(config)?;
    if let Some(s) = seed {
        job.train.seed = s;
    }
    job.dataset.validate()?;
    job.train.validate()?;
    let prepared = match job.dataset.kind {
        DatasetKind::Audio => prepare_audio(&load_audio_dataset(&job.dataset)?, job.quality, &Default::default())?,
        kind => {
            if !(job.quality.fract() == 0.0 && (1.0..=100.0).contains(&job.quality)) {
                return Err(Error::InvalidQuality(job.quality as i64).into());
            }
            let data = if kind == DatasetKind::Cifar10 {
                load_cifar10(&job.dataset)?
            } else {
                let tr = job.dataset.subset.train_per_class.unwrap_or(0) * 2;
                let te = job.dataset.subset.test_per_class.unwrap_or(0) * 2;
                ImageDataset {
                    train: synthetic_knee_images(tr, 32, job.dataset.seed)?,
                    test: synthetic_knee_images(te, 32, job.dataset.seed.wrapping_add(1))?,
                    classes: 2,
                }
            };
            prepare_images(&data, job.quality as u8, &BitBudgetModel::default())?
        }
    };
    let spec = job.arch.spec(prepared.input, prepared.classes)?;
    let mut net = Network::<f32>::new(&spec, job.train.seed)?;
    let result = train(&mut net, &prepared.train, &prepared.test, &job.train)?;
    if let Some(path) = &job.checkpoint {
        save_checkpoint(path, &net)?;
    }
    let text = format!(
        "arch {}\nparams {}\nfinal_test_accuracy {:.6}\nepochs_to_converge {}\n",
        spec.name,
        count_params(&spec)?,
        result.final_test_accuracy,
        result.epochs_to_converge
    );
    emit(json, serde_json::to_value(&result).map_err(Error::from)?, text);
    Ok(())
}

fn cmd_fit(input: &Path, tolerance: f64, domain: DomainArg, json: bool) -> CmdResult {
    let records = read_sweep_csv(input)?;
    let domain = match domain {
        DomainArg::Image => Domain::Image,
        DomainArg::Audio => Domain::Audio,
    };
    let report = summarize(&records, domain, tolerance, &BitBudgetModel::default())?;
    let mut text = String::new();
    for a in &report.archs {
        text += &format!(
            "{} c={:.6} q_knee={} content_bits={} noise_bits={}\n",
            a.arch,
            a.c.unwrap_or(f64::NAN),
            a.q_knee.map_or("-".into(), |q| q.to_string()),
            a.noise_bits.map_or("-".into(), |n| format!("{:.4}", n.content_bits)),
            a.noise_bits.map_or("-".into(), |n| format!("{:.4}", n.noise_bits)),
        );
    }
    emit(json, serde_json::to_value(&report).map_err(Error::from)?, text);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = cli.seed;
    let result = match &cli.cmd {
        Cmd::Bits(a) => cmd_bits(a, cli.json),
        Cmd::Sweep { config } => cmd_sweep(config, seed, cli.json),
        Cmd::Synth(a) => cmd_synth(a, seed.unwrap_or(0), cli.json),
        Cmd::Plot(a) => cmd_plot(a),
        Cmd::Transcode { input, quality, output } => cmd_transcode(input, *quality, output.as_deref(), cli.json),
        Cmd::Melspec { input, output, mels } => cmd_melspec(input, output, *mels, cli.json),
        Cmd::Train { config } => cmd_train(config, seed, cli.json),
        Cmd::Fit { input, tolerance, domain } => cmd_fit(input, *tolerance, *domain, cli.json),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
