use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{load_audio_dataset, load_cifar10, AudioDataset, DatasetKind, DatasetRef, ImageDataset, LabeledAudio, LabeledImages};
use super::summary::{summarize_lenient, write_summary_csv, Domain};
use super::synth::synthetic_knee_images;
use crate::audio::{mel_spectrogram, AudioQuality, AudioQuantizer, MelConfig, PcmSignal};
use crate::bits::BitBudgetModel;
use crate::error::{Error, Result};
use crate::helmholtz::{quality_to_q, DEFAULT_KNEE_TOLERANCE};
use crate::image::{transcode_image, ImageRgb};
use crate::learner::{count_params, train, Dataset, ModelSpec, Network, Tensor, TrainConfig, ZooId};
use crate::plot::{render_svg, PlotKind};

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "PN_WORKERS";
pub const RESULTS_FILE: &str = "results.csv";
pub const CURVES_FILE: &str = "curves.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const ACCURACY_SVG: &str = "accuracy_vs_q.svg";
pub const EPOCHS_SVG: &str = "epochs_vs_q.svg";
const CELLS_DIR: &str = "cells";

pub const CSV_HEADER: [&str; 10] =
    ["quality", "Q", "bits_per_pixel", "arch", "params", "seed", "test_accuracy", "epochs_to_converge", "wall_seconds", "status"];

/// A zoo entry by name, or an inline model whose input dims are taken from
/// the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ArchRef {
    Zoo(ZooId),
    Custom(ModelSpec),
}

impl ArchRef {
    pub fn name(&self) -> String {
        match self {
            ArchRef::Zoo(z) => z.to_string(),
            ArchRef::Custom(s) => s.name.clone(),
        }
    }

    pub fn spec(&self, input: [usize; 3], classes: usize) -> Result<ModelSpec> {
        let spec = match self {
            ArchRef::Zoo(z) => z.spec(input, classes),
            ArchRef::Custom(s) => ModelSpec { input, ..s.clone() },
        };
        spec.validate(classes)?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AudioPrep {
    /// Clips are zero-padded or cut to this length; defaults to the longest clip.
    pub clip_samples: Option<usize>,
    pub mel: MelConfig,
    pub quantizer: AudioQuantizer,
}


fn default_tolerance() -> f64 {
    DEFAULT_KNEE_TOLERANCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub dataset: DatasetRef,
    /// JPEG qualities (1..=100) for image data, `Q` values in `[0, 1]` for audio.
    pub grid: Vec<f64>,
    pub archs: Vec<ArchRef>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub train: TrainConfig,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub workers: Option<usize>,
    /// Off by default so reruns produce identical bytes.
    #[serde(default)]
    pub record_wall_time: bool,
    #[serde(default)]
    pub budget: BitBudgetModel,
    #[serde(default)]
    pub audio: AudioPrep,
    #[serde(default = "default_tolerance")]
    pub knee_tolerance: f64,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn domain(&self) -> Domain {
        match self.dataset.kind {
            DatasetKind::Audio => Domain::Audio,
            _ => Domain::Image,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.dataset.validate()?;
        self.train.validate()?;
        if self.grid.is_empty() || self.archs.is_empty() || self.seeds.is_empty() {
            return bad("grid, archs and seeds must be non-empty".into());
        }
        let up = self.grid.windows(2).all(|w| w[0] < w[1]);
        let down = self.grid.windows(2).all(|w| w[0] > w[1]);
        if !(up || down) {
            return bad("quality grid must be strictly ordered".into());
        }
        for &g in &self.grid {
            let ok = match self.domain() {
                Domain::Image => g.fract() == 0.0 && (1.0..=100.0).contains(&g),
                Domain::Audio => (0.0..=1.0).contains(&g),
            };
            if !ok {
                return bad(format!("grid value {g} is out of range"));
            }
        }
        let mut names: Vec<String> = self.archs.iter().map(ArchRef::name).collect();
        names.sort();
        names.dedup();
        if names.len() != self.archs.len() {
            return bad("architecture names must be unique".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        Ok(())
    }

    fn worker_count(&self) -> usize {
        std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|v| v.parse().ok())
            .filter(|&n: &usize| n > 0)
            .or(self.workers)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CellStatus {
    Ok,
    Diverged { epoch: usize },
    Failed(String),
}

impl CellStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, CellStatus::Ok)
    }

    pub fn label(&self) -> String {
        match self {
            CellStatus::Ok => "ok".into(),
            CellStatus::Diverged { epoch } => format!("diverged at epoch {epoch}"),
            CellStatus::Failed(m) => format!("failed: {m}"),
        }
    }

    pub fn parse(s: &str) -> Self {
        if s == "ok" {
            CellStatus::Ok
        } else if let Some(e) = s.strip_prefix("diverged at epoch ").and_then(|e| e.parse().ok()) {
            CellStatus::Diverged { epoch: e }
        } else {
            CellStatus::Failed(s.strip_prefix("failed: ").unwrap_or(s).to_string())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub quality: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    /// Remaining bits per pixel (image) or quantized-level entropy over 16 bits (audio).
    pub bits_per_pixel: f64,
    pub arch: String,
    pub params: usize,
    pub seed: u64,
    pub test_accuracy: Option<f64>,
    pub epochs_to_converge: Option<usize>,
    pub wall_seconds: f64,
    pub status: CellStatus,
}

/// Per-epoch history of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellCurve {
    pub train_accuracy: Vec<f64>,
    pub test_accuracy: Vec<f64>,
    pub train_loss: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CellFile {
    record: SweepRecord,
    curve: Option<CellCurve>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Grid order: quality, then architecture, then seed.
    pub records: Vec<SweepRecord>,
    /// Cells that ran in this invocation (the rest were resumed).
    pub trained: usize,
    pub failed: usize,
}

impl SweepResult {
    pub fn all_failed(&self) -> bool {
        !self.records.is_empty() && self.failed == self.records.len()
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

pub fn write_sweep_csv<W: std::io::Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            fmt_num(r.quality),
            fmt_num(r.q),
            format!("{:.6}", r.bits_per_pixel),
            r.arch.clone(),
            r.params.to_string(),
            r.seed.to_string(),
            r.test_accuracy.map(|a| format!("{a:.6}")).unwrap_or_default(),
            r.epochs_to_converge.map(|e| e.to_string()).unwrap_or_default(),
            format!("{:.3}", r.wall_seconds),
            r.status.label(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a sweep CSV, naming the first required column that is absent.
pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRecord>> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    parse_sweep_csv(&fs::read(path)?)
}

pub fn parse_sweep_csv(bytes: &[u8]) -> Result<Vec<SweepRecord>> {
    let mut reader = csv::Reader::from_reader(bytes);
    let headers = reader.headers()?.clone();
    let mut col = BTreeMap::new();
    for name in CSV_HEADER {
        let i = headers.iter().position(|h| h == name).ok_or_else(|| Error::MissingColumn(name.into()))?;
        col.insert(name, i);
    }
    let mut out = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row?;
        let field = |name: &str| row.get(col[name]).unwrap_or("");
        let num = |name: &str| -> Result<f64> {
            field(name)
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("row {}: bad {name} {:?}", line + 2, field(name))))
        };
        let opt = |name: &str| -> Result<Option<f64>> {
            if field(name).is_empty() {
                Ok(None)
            } else {
                num(name).map(Some)
            }
        };
        out.push(SweepRecord {
            quality: num("quality")?,
            q: num("Q")?,
            bits_per_pixel: num("bits_per_pixel")?,
            arch: field("arch").to_string(),
            params: num("params")? as usize,
            seed: num("seed")? as u64,
            test_accuracy: opt("test_accuracy")?,
            epochs_to_converge: opt("epochs_to_converge")?.map(|e| e as usize),
            wall_seconds: num("wall_seconds")?,
            status: CellStatus::parse(field("status")),
        });
    }
    Ok(out)
}

enum Source {
    Images(ImageDataset),
    Audio(AudioDataset),
}

/// Training material at one quality, shared by every cell at that quality.
pub struct Prepared {
    pub train: Dataset<f32>,
    pub test: Dataset<f32>,
    pub input: [usize; 3],
    pub classes: usize,
    pub bits_per_pixel: f64,
}

fn load_source(d: &DatasetRef) -> Result<Source> {
    Ok(match d.kind {
        DatasetKind::Cifar10 => Source::Images(load_cifar10(d)?),
        DatasetKind::Audio => Source::Audio(load_audio_dataset(d)?),
        DatasetKind::SyntheticKnee => {
            let train_n = 2 * d.subset.train_per_class.unwrap_or(0);
            let test_n = 2 * d.subset.test_per_class.unwrap_or(0);
            Source::Images(ImageDataset {
                train: synthetic_knee_images(train_n, 32, d.seed)?,
                test: synthetic_knee_images(test_n, 32, d.seed.wrapping_add(1))?,
                classes: 2,
            })
        }
    })
}

/// Pixel bytes to `[N, 3, H, W]`, centred and scaled to roughly unit range.
pub fn images_to_tensor(images: &[ImageRgb]) -> Result<Tensor<f32>> {
    let first = images.first().ok_or_else(|| Error::Dataset("no images".into()))?;
    let (w, h) = (first.width(), first.height());
    let mut data = Vec::with_capacity(images.len() * 3 * w * h);
    for img in images {
        if (img.width(), img.height()) != (w, h) {
            return Err(Error::Dataset("images differ in size".into()));
        }
        for c in 0..3 {
            data.extend(img.pixels().iter().skip(c).step_by(3).map(|&v| (v as f32 - 127.5) / 64.0));
        }
    }
    Tensor::new(vec![images.len(), 3, h, w], data)
}

fn transcode_set(set: &LabeledImages, q: u8) -> Result<Vec<ImageRgb>> {
    set.images.par_iter().map(|img| Ok(transcode_image(img, q)?.0)).collect()
}

/// Transcodes the image data at quality `q` and packs it as tensors.
pub fn prepare_images(data: &ImageDataset, q: u8, budget: &BitBudgetModel) -> Result<Prepared> {
    let train_imgs = transcode_set(&data.train, q)?;
    let test_imgs = transcode_set(&data.test, q)?;
    let train_x = images_to_tensor(&train_imgs)?;
    let test_x = images_to_tensor(&test_imgs)?;
    let s = train_x.shape().to_vec();
    Ok(Prepared {
        train: Dataset::new(train_x, data.train.labels.clone())?,
        test: Dataset::new(test_x, data.test.labels.clone())?,
        input: [s[1], s[2], s[3]],
        classes: data.classes,
        bits_per_pixel: budget.bits_remaining(q)?,
    })
}

fn fit_length(s: &PcmSignal, len: usize) -> Result<PcmSignal> {
    let mut v = s.samples().to_vec();
    v.resize(len, 0);
    PcmSignal::new(v, s.rate())
}

fn audio_tensor(set: &LabeledAudio, quality: AudioQuality, prep: &AudioPrep, len: usize) -> Result<(Tensor<f32>, f64)> {
    let rows: Vec<(Vec<f32>, usize, f64)> = set
        .signals
        .par_iter()
        .map(|s| {
            let (q, entropy) = prep.quantizer.apply_with_entropy(&fit_length(s, len)?, quality)?;
            let mel = mel_spectrogram(&q, &prep.mel)?;
            let frames = mel.frames();
            let floor = prep.mel.floor_db as f32;
            let v = mel.values().iter().map(|&d| (d + floor / 2.0) / (floor / 2.0)).collect();
            Ok((v, frames, entropy))
        })
        .collect::<Result<_>>()?;
    let frames = rows.first().map(|r| r.1).ok_or_else(|| Error::Dataset("no audio clips".into()))?;
    let entropy = rows.iter().map(|r| r.2).sum::<f64>();
    let data = rows.into_iter().flat_map(|r| r.0).collect();
    Ok((Tensor::new(vec![set.len(), 1, prep.mel.n_mels, frames], data)?, entropy))
}

/// Quantizes every clip at `Q`, then converts it to a mel spectrogram.
pub fn prepare_audio(data: &AudioDataset, q: f64, prep: &AudioPrep) -> Result<Prepared> {
    let quality = AudioQuality::new(q)?;
    let longest = data.train.signals.iter().chain(&data.test.signals).map(PcmSignal::len).max().unwrap_or(0);
    let len = prep.clip_samples.unwrap_or(longest);
    let (train_x, e_train) = audio_tensor(&data.train, quality, prep, len)?;
    let (test_x, e_test) = audio_tensor(&data.test, quality, prep, len)?;
    let s = train_x.shape().to_vec();
    let clips = (data.train.len() + data.test.len()) as f64;
    Ok(Prepared {
        train: Dataset::new(train_x, data.train.labels.clone())?,
        test: Dataset::new(test_x, data.test.labels.clone())?,
        input: [s[1], s[2], s[3]],
        classes: data.class_names.len(),
        bits_per_pixel: (e_train + e_test) / clips / 16.0,
    })
}

fn cell_tag(domain: Domain, quality: f64, arch: &str, seed: u64) -> String {
    let safe: String = arch.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
    match domain {
        Domain::Image => format!("q{:03}__{safe}__seed{seed}", quality as u32),
        Domain::Audio => format!("Q{quality:.4}__{safe}__seed{seed}"),
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)?;
    Ok(())
}

/// Trains one fresh model on prepared data.
pub fn run_cell(
    prepared: &Prepared,
    arch: &ArchRef,
    seed: u64,
    quality: f64,
    q: f64,
    cfg: &SweepConfig,
) -> (SweepRecord, Option<CellCurve>) {
    let start = Instant::now();
    let mut record = SweepRecord {
        quality,
        q,
        bits_per_pixel: prepared.bits_per_pixel,
        arch: arch.name(),
        params: 0,
        seed,
        test_accuracy: None,
        epochs_to_converge: None,
        wall_seconds: 0.0,
        status: CellStatus::Ok,
    };
    let outcome = (|| -> Result<_> {
        let spec = arch.spec(prepared.input, prepared.classes)?;
        record.params = count_params(&spec)?;
        let mut net = Network::<f32>::new(&spec, seed)?;
        let tc = TrainConfig { seed, ..cfg.train.clone() };
        train(&mut net, &prepared.train, &prepared.test, &tc)
    })();
    let curve = match outcome {
        Ok(r) => {
            record.test_accuracy = Some(r.final_test_accuracy);
            record.epochs_to_converge = Some(r.epochs_to_converge);
            Some(CellCurve { train_accuracy: r.train_accuracy, test_accuracy: r.test_accuracy, train_loss: r.train_loss })
        }
        Err(Error::Diverged { epoch, .. }) => {
            record.status = CellStatus::Diverged { epoch };
            None
        }
        Err(e) => {
            record.status = CellStatus::Failed(e.to_string());
            None
        }
    };
    if cfg.record_wall_time {
        record.wall_seconds = start.elapsed().as_secs_f64();
    }
    (record, curve)
}

fn write_curves(path: &Path, cells: &[(SweepRecord, Option<CellCurve>)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["quality", "Q", "arch", "seed", "epoch", "train_accuracy", "test_accuracy", "train_loss"])?;
    for (r, c) in cells {
        let Some(c) = c else { continue };
        for e in 0..c.test_accuracy.len() {
            w.write_record([
                fmt_num(r.quality),
                fmt_num(r.q),
                r.arch.clone(),
                r.seed.to_string(),
                (e + 1).to_string(),
                format!("{:.6}", c.train_accuracy[e]),
                format!("{:.6}", c.test_accuracy[e]),
                format!("{:.6}", c.train_loss[e]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Runs every (quality, architecture, seed) cell and writes the results CSV,
/// per-epoch curves, summary JSON and CSV, and two SVG plots.
///
/// Finished cells leave a marker under `cells/` and are not retrained on a
/// rerun. Each quality is transcoded once, and only if a cell needs it.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let domain = cfg.domain();
    let out = &cfg.output_dir;
    let cells_dir = out.join(CELLS_DIR);
    fs::create_dir_all(&cells_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.worker_count())
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;

    let mut source: Option<Source> = None;
    let mut cells: Vec<(SweepRecord, Option<CellCurve>)> = Vec::new();
    let mut trained = 0;
    for &quality in &cfg.grid {
        let q = match domain {
            Domain::Image => quality_to_q(quality as u8),
            Domain::Audio => quality,
        };
        let jobs: Vec<(&ArchRef, u64, PathBuf)> = cfg
            .archs
            .iter()
            .flat_map(|a| cfg.seeds.iter().map(move |&s| (a, s)))
            .map(|(a, s)| (a, s, cells_dir.join(format!("{}.json", cell_tag(domain, quality, &a.name(), s)))))
            .collect();
        let mut done: BTreeMap<usize, CellFile> = BTreeMap::new();
        for (i, (_, _, path)) in jobs.iter().enumerate() {
            if path.is_file() {
                done.insert(i, serde_json::from_slice(&fs::read(path)?)?);
            }
        }
        if done.len() < jobs.len() {
            if source.is_none() {
                source = Some(load_source(&cfg.dataset)?);
            }
            let prepared = pool.install(|| match source.as_ref().unwrap() {
                Source::Images(d) => prepare_images(d, quality as u8, &cfg.budget),
                Source::Audio(d) => prepare_audio(d, quality, &cfg.audio),
            })?;
            let pending: Vec<usize> = (0..jobs.len()).filter(|i| !done.contains_key(i)).collect();
            let fresh: Vec<(usize, CellFile)> = pool.install(|| {
                pending
                    .par_iter()
                    .map(|&i| {
                        let (arch, seed, path) = &jobs[i];
                        let (record, curve) = run_cell(&prepared, arch, *seed, quality, q, cfg);
                        let file = CellFile { record, curve };
                        write_atomic(path, &serde_json::to_vec_pretty(&file)?)?;
                        Ok((i, file))
                    })
                    .collect::<Result<_>>()
            })?;
            trained += fresh.len();
            done.extend(fresh);
        }
        cells.extend(done.into_values().map(|f| (f.record, f.curve)));
    }

    let records: Vec<SweepRecord> = cells.iter().map(|c| c.0.clone()).collect();
    let failed = records.iter().filter(|r| !r.status.is_ok()).count();
    let mut buf = Vec::new();
    write_sweep_csv(&records, &mut buf)?;
    fs::write(out.join(RESULTS_FILE), &buf)?;
    write_curves(&out.join(CURVES_FILE), &cells)?;

    let summary = summarize_lenient(&records, domain, cfg.knee_tolerance, &cfg.budget);
    fs::write(out.join(SUMMARY_JSON), serde_json::to_string_pretty(&summary)? + "\n")?;
    let mut buf = Vec::new();
    write_summary_csv(&summary, &mut buf)?;
    fs::write(out.join(SUMMARY_CSV), buf)?;
    let fits = summary.fitted_scales();
    fs::write(out.join(ACCURACY_SVG), render_svg(PlotKind::AccuracyVsQ, &records, Some(&fits), "Accuracy vs Q")?)?;
    fs::write(out.join(EPOCHS_SVG), render_svg(PlotKind::EpochsVsQ, &records, None, "Epochs to converge vs Q")?)?;
    Ok(SweepResult { records, trained, failed })
}
