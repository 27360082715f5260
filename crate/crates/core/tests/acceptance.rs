//! Acceptance gate. Prints one PASS/FAIL/BLOCKED line per criterion and exits
//! non-zero when any criterion fails. BLOCKED criteria need external data.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use noisebits::audio::{parse_wav, wav_bytes, Mdct, PcmSignal};
use noisebits::bits::BitBudgetModel;
use noisebits::helmholtz::{
    detect_knee, estimate_noise_scalar, fit_curve, synthesize_readings, theoretical_curve, ContentSource,
    CurvePoint, SensorModel,
};
use noisebits::image::{forward_dct_shifted, inverse_dct_unclamped, CoeffBlock, ImageRgb};
use noisebits::learner::{
    count_params, grad_check, parse_checkpoint, GradCheckConfig, LayerSpec, ModelSpec, Objective, Tensor,
    TrainConfig, ZooId,
};
use noisebits::sweep::{
    cifar10_bytes, load_cifar10, parse_cifar10, parse_sweep_csv, read_manifest, run_sweep, summarize, ArchRef,
    DatasetKind, DatasetRef, Domain, LabeledImages, SubsetSpec, SweepConfig, SweepRecord, ACCURACY_SVG,
    EPOCHS_SVG, RESULTS_FILE, SUMMARY_CSV, SUMMARY_JSON,
};
use noisebits::{Error, Network64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Directory holding the CIFAR-10 binary batches.
const CIFAR_ENV: &str = "PN_CIFAR10_DIR";

enum Outcome {
    Pass(String),
    Fail(String),
    Blocked(String),
}

type Check = std::result::Result<String, String>;
type ErrorCase = (&'static str, Error, fn(&Error) -> bool);
type Criterion = (&'static str, Box<dyn FnOnce() -> Outcome>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T>(r: noisebits::Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn timed(limit: Duration, f: impl FnOnce() -> Check) -> Outcome {
    let t = Instant::now();
    let r = catch_unwind(AssertUnwindSafe(f));
    let took = t.elapsed();
    match r {
        Ok(Ok(detail)) if took <= limit => Outcome::Pass(format!("{detail}; {took:.2?}")),
        Ok(Ok(detail)) => Outcome::Fail(format!("{detail}; {took:.2?} exceeds {limit:?}")),
        Ok(Err(e)) => Outcome::Fail(format!("{e}; {took:.2?}")),
        Err(_) => Outcome::Fail("panicked".into()),
    }
}

// ---------------------------------------------------------------- bit budget

fn bit_budget() -> Check {
    let m = BitBudgetModel::default();
    let lost50 = ok(m.bits_lost(50))?;
    let lost80 = ok(m.bits_lost(80))?;
    let rem25 = ok(m.bits_remaining(25))?;
    let inv = ok(m.quality_for_bits(1.0))?;
    ensure((lost50 - 13.61).abs() <= 0.01, || format!("bits_lost(50) = {lost50}"))?;
    ensure((lost80 - 12.29).abs() <= 0.02, || format!("bits_lost(80) = {lost80}"))?;
    ensure((rem25 - 1.39).abs() <= 0.05, || format!("bits_remaining(25) = {rem25}"))?;
    ensure(inv == 19, || format!("quality_for_bits(1.0) = {inv}"))?;
    Ok(format!("lost(50)={lost50:.4} lost(80)={lost80:.4} remaining(25)={rem25:.4} q(1.0)={inv}"))
}

// ---------------------------------------------------------------- transforms

fn transforms() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut dct_rt, mut dct_parseval) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let x: [f64; 64] = std::array::from_fn(|_| rng.random_range(0.0..=255.0) - 128.0);
        let c: CoeffBlock<f64> = forward_dct_shifted(&x);
        let back = inverse_dct_unclamped(&c);
        // inverse_dct_unclamped adds the 128 level shift back.
        for (a, b) in x.iter().zip(&back) {
            dct_rt = dct_rt.max((a + 128.0 - b).abs());
        }
        let ex: f64 = x.iter().map(|v| v * v).sum();
        let ec: f64 = c.0.iter().map(|v| v * v).sum();
        dct_parseval = dct_parseval.max((ex - ec).abs() / ex);
    }
    let (mut mdct_rt, mut mdct_parseval) = (0.0f64, 0.0f64);
    let mdct = Mdct::<f64>::new(256);
    for _ in 0..1000 {
        let len = rng.random_range(1..2000);
        let x: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
        let frames = mdct.forward(&x);
        let back = mdct.inverse(&frames);
        ensure(back.len() == x.len(), || format!("length {} -> {}", x.len(), back.len()))?;
        for (a, b) in x.iter().zip(&back) {
            mdct_rt = mdct_rt.max((a - b).abs());
        }
        let ex: f64 = x.iter().map(|v| v * v).sum();
        let ec: f64 = frames.coeffs.iter().flatten().map(|v| v * v).sum();
        mdct_parseval = mdct_parseval.max((ex - ec).abs() / ex);
    }
    ensure(dct_rt <= 1e-9, || format!("DCT round trip error {dct_rt:e}"))?;
    ensure(dct_parseval <= 1e-9, || format!("DCT Parseval error {dct_parseval:e}"))?;
    ensure(mdct_rt <= 1e-9, || format!("MDCT round trip error {mdct_rt:e}"))?;
    ensure(mdct_parseval <= 1e-9, || format!("MDCT Parseval error {mdct_parseval:e}"))?;
    Ok(format!(
        "DCT rt={dct_rt:.1e} parseval={dct_parseval:.1e}; MDCT rt={mdct_rt:.1e} parseval={mdct_parseval:.1e}"
    ))
}

// ---------------------------------------------------------------- learner

fn conv(cin: usize, cout: usize) -> usize {
    9 * cin * cout + cout
}

fn dense(i: usize, o: usize) -> usize {
    i * o + o
}

/// Hand count from the layer tables. Convolutions keep the spatial size;
/// each audio max-pool halves it, rounding up.
fn closed_form(id: ZooId, input: [usize; 3]) -> usize {
    let [c, h, w] = input;
    let classes = id.default_classes();
    let trunk = conv(c, 32) + conv(32, 64) + conv(64, 128) + 3 * conv(128, 128);
    let pair = 2 * conv(128, 128);
    let flat = 128 * h * w;
    let chain = |first: usize, hidden: &[usize]| {
        let mut total = 0;
        let mut prev = first;
        for &u in hidden.iter().chain([classes].iter()) {
            total += dense(prev, u);
            prev = u;
        }
        total
    };
    let audio = |loops: usize, fc: &[usize]| {
        let (mut ah, mut aw) = (h, w);
        for _ in 0..loops {
            ah = ah.div_ceil(2);
            aw = aw.div_ceil(2);
        }
        conv(c, 32) + 2 * 32 + loops * conv(32, 32) + chain(32 * ah * aw, fc)
    };
    match id {
        ZooId::ImageA => trunk + pair + conv(128, classes),
        ZooId::ImageB => trunk + pair + chain(flat, &[128, 128]),
        ZooId::ImageC => trunk + pair + conv(128, 128) + pair + conv(128, classes),
        ZooId::ImageD => trunk + pair + conv(128, 128) + pair + chain(flat, &[128, 128]),
        ZooId::ImageE => trunk + pair + chain(flat, &[256, 256]),
        ZooId::ImageF => trunk + chain(flat, &[128, 256, 256]),
        ZooId::AudioA => audio(3, &[]),
        ZooId::AudioB => audio(4, &[128]),
        ZooId::AudioC => audio(3, &[64, 128]),
        ZooId::AudioD => audio(3, &[128]),
        ZooId::AudioE => audio(3, &[128, 128]),
        ZooId::AudioF => audio(2, &[128]),
    }
}

fn random_input(shape: Vec<usize>, seed: u64) -> Tensor<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = shape.iter().product();
    Tensor::new(shape, (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn learner() -> Check {
    let mut lines = Vec::new();

    for id in ZooId::ALL {
        let shapes: [[usize; 3]; 2] =
            if id.is_image() { [[3, 32, 32], [3, 8, 8]] } else { [[1, 96, 64], [1, 8, 8]] };
        for input in shapes {
            let spec = id.spec(input, id.default_classes());
            let counted = ok(count_params(&spec))?;
            let built = ok(Network64::new(&spec, 0))?.param_count();
            let want = closed_form(id, input);
            ensure(counted == want && built == want, || {
                format!("{id} {input:?}: counter {counted}, network {built}, oracle {want}")
            })?;
        }
    }
    lines.push("param counts match on 24 specs".to_string());

    let toy = ModelSpec::new(
        "two-conv",
        [3, 8, 8],
        vec![
            LayerSpec::Conv { filters: 4, kernel: 3 },
            LayerSpec::Relu,
            LayerSpec::Conv { filters: 6, kernel: 3 },
            LayerSpec::Relu,
            LayerSpec::Flatten,
            LayerSpec::Dense { units: 10 },
            LayerSpec::Softmax,
        ],
    );
    let net = ok(Network64::new(&toy, 3))?;
    let x = random_input(vec![4, 3, 8, 8], 4);
    let obj = Objective::CrossEntropy(vec![0, 3, 7, 9]);
    let r = ok(grad_check(&net, &x, &obj, &GradCheckConfig { samples: 2000, ..Default::default() }))?;
    ensure(r.max_relative_error < 1e-4, || format!("two-conv model: {r:?}"))?;
    let mut worst = r.max_relative_error;
    lines.push(format!("two-conv {} weights {:.1e}", r.checked, r.max_relative_error));

    let mut checked = 0;
    for (k, id) in ZooId::ALL.into_iter().enumerate() {
        let input = if id.is_image() { [3, 8, 8] } else { [1, 8, 8] };
        let classes = id.default_classes();
        let net = ok(Network64::new(&id.spec(input, classes), 10 + k as u64))?;
        let x = random_input(vec![2, input[0], 8, 8], 20 + k as u64);
        let obj = Objective::CrossEntropy(vec![1, classes - 1]);
        let cfg = GradCheckConfig { samples: 120, seed: k as u64, ..Default::default() };
        let r = ok(grad_check(&net, &x, &obj, &cfg))?;
        ensure(r.max_relative_error < 1e-4, || format!("{id}: {r:?}"))?;
        ensure(r.checked > 0, || format!("{id}: nothing checked"))?;
        worst = worst.max(r.max_relative_error);
        checked += r.checked;
    }
    lines.push(format!("12 zoo archs at 8x8, {checked} weights, worst {worst:.1e}"));
    Ok(lines.join("; "))
}

// ---------------------------------------------------------------- helmholtz

fn helmholtz() -> Check {
    let r_max = 100.0;
    let source = ok(ContentSource::new(vec![0.5, 0.25, 0.125, 0.125]))?;
    let h = -(0.5f64 * 0.5f64.log2() + 0.25 * 0.25f64.log2() + 2.0 * 0.125 * 0.125f64.log2());
    let mut report = Vec::new();
    for n in [0.5, 1.0, 2.0, 4.0] {
        let model = ok(SensorModel::new(r_max, n, 0.01))?;
        let mut hits = 0;
        let mut worst = 0.0f64;
        for trial in 0..100u64 {
            let readings = ok(synthesize_readings(&model, &source, 10_000, 1000 * trial + 7))?;
            let est = ok(estimate_noise_scalar(&readings, r_max, h))?;
            let rel = (est - n).abs() / n;
            worst = worst.max(rel);
            if rel <= 0.05 {
                hits += 1;
            }
        }
        ensure(hits >= 95, || format!("n={n}: {hits}/100 within 5%"))?;
        report.push(format!("n={n}: {hits}/100 (worst {:.2}%)", 100.0 * worst));
    }
    Ok(report.join(", "))
}

// ---------------------------------------------------------------- curve fit

fn curves() -> Check {
    let grid: Vec<f64> = (0..20).map(|i| i as f64 * 0.05).collect();
    let mut exact = 0.0f64;
    for c in [0.05, 0.1, 0.2172, 0.3] {
        let curve = ok(theoretical_curve(c, &grid))?;
        let fitted = ok(fit_curve(curve.points()))?;
        exact = exact.max((fitted - c).abs() / c);
    }
    ensure(exact <= 1e-12, || format!("noiseless fit error {exact:e}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let unit = Normal::new(0.0, 1.0).unwrap();
    let mut noisy = 0.0f64;
    for trial in 0..200 {
        let c = 0.1 + 0.001 * trial as f64;
        let pts: Vec<CurvePoint> = grid
            .iter()
            .map(|&q| {
                let a = c * (100.0 - 100.0 * q).ln();
                CurvePoint::new(q, a * (1.0 + 0.02 * unit.sample(&mut rng)))
            })
            .collect();
        noisy = noisy.max((ok(fit_curve(&pts))? - c).abs() / c);
    }
    ensure(noisy <= 0.05, || format!("noisy fit error {noisy}"))?;

    let qs = [0.05, 0.2, 0.4, 0.5, 0.75, 0.9, 0.97];
    for step in 0..qs.len() {
        let pts: Vec<CurvePoint> =
            qs.iter().enumerate().map(|(i, &q)| CurvePoint::new(q, if i <= step { 0.9 } else { 0.1 })).collect();
        let knee = ok(detect_knee(&pts, 0.05))?;
        ensure(knee == qs[step], || format!("step after {}: knee {knee}", qs[step]))?;
    }
    Ok(format!("noiseless {exact:.1e}, 2% noise worst {:.2}%, {} step fixtures exact", 100.0 * noisy, qs.len()))
}

// ---------------------------------------------------------------- sweeps

fn sweep_config(dataset: DatasetRef, grid: Vec<f64>, arch: ModelSpec, train: TrainConfig, out: &Path) -> SweepConfig {
    SweepConfig {
        dataset,
        grid,
        archs: vec![ArchRef::Custom(arch)],
        seeds: vec![1],
        train,
        output_dir: out.to_path_buf(),
        workers: None,
        record_wall_time: false,
        budget: Default::default(),
        audio: Default::default(),
        knee_tolerance: 0.05,
    }
}

fn accuracy_at(records: &[SweepRecord], quality: f64) -> std::result::Result<f64, String> {
    records
        .iter()
        .find(|r| r.quality == quality)
        .and_then(|r| r.test_accuracy)
        .ok_or_else(|| format!("no accuracy at q={quality}"))
}

fn knee_of(cfg: &SweepConfig, records: &[SweepRecord]) -> std::result::Result<f64, String> {
    let report = ok(summarize(records, Domain::Image, cfg.knee_tolerance, &cfg.budget))?;
    report.archs[0].q_knee.ok_or_else(|| "no knee".into())
}

fn cifar_trend() -> Outcome {
    let Some(root) = std::env::var_os(CIFAR_ENV).map(PathBuf::from) else {
        return Outcome::Blocked(format!("set {CIFAR_ENV} to the CIFAR-10 binary batch directory"));
    };
    timed(Duration::from_secs(30 * 60), || {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let dataset = DatasetRef {
            kind: DatasetKind::Cifar10,
            root,
            subset: SubsetSpec { train_per_class: Some(200), test_per_class: Some(50), ..Default::default() },
            seed: 3,
        };
        use LayerSpec::*;
        let small = ModelSpec::new(
            "small-conv",
            [3, 32, 32],
            vec![
                Conv { filters: 16, kernel: 3 },
                Relu,
                MaxPool,
                Conv { filters: 32, kernel: 3 },
                Relu,
                MaxPool,
                Conv { filters: 64, kernel: 3 },
                Relu,
                MaxPool,
                Flatten,
                Dense { units: 10 },
                Softmax,
            ],
        );
        let train = TrainConfig { learning_rate: 0.01, batch_size: 32, max_epochs: 25, ..Default::default() };
        let grid = vec![95.0, 80.0, 50.0, 25.0, 10.0, 3.0];
        let cfg = sweep_config(dataset, grid, small, train, dir.path());
        let res = ok(run_sweep(&cfg))?;
        let (a95, a80, a3) =
            (accuracy_at(&res.records, 95.0)?, accuracy_at(&res.records, 80.0)?, accuracy_at(&res.records, 3.0)?);
        let knee = knee_of(&cfg, &res.records)?;
        ensure(a80 >= a95 - 0.03, || format!("acc(80)={a80:.3} vs acc(95)={a95:.3}"))?;
        ensure(a3 <= a95 - 0.10, || format!("acc(3)={a3:.3} vs acc(95)={a95:.3}"))?;
        ensure(knee > 0.05 && knee <= 0.97, || format!("knee Q={knee}"))?;
        Ok(format!("acc(95)={a95:.3} acc(80)={a80:.3} acc(3)={a3:.3} knee Q={knee}"))
    })
}

fn linear_head() -> ModelSpec {
    ModelSpec::new(
        "linear",
        [3, 32, 32],
        vec![LayerSpec::Flatten, LayerSpec::Dense { units: 2 }, LayerSpec::Softmax],
    )
}

fn synthetic(per_class: usize, grid: Vec<f64>, out: &Path) -> SweepConfig {
    let dataset = DatasetRef {
        kind: DatasetKind::SyntheticKnee,
        root: PathBuf::new(),
        subset: SubsetSpec { train_per_class: Some(per_class), test_per_class: Some(per_class / 2), ..Default::default() },
        seed: 7,
    };
    let train = TrainConfig { learning_rate: 0.01, batch_size: 16, max_epochs: 8, ..Default::default() };
    sweep_config(dataset, grid, linear_head(), train, out)
}

/// Lowest quality at which the label coefficient survives quantization.
///
/// The label sits on luma coefficient (4,4) with amplitude 35; its base
/// divisor is 68. Integer scaling gives `floor((68·sf + 50)/100)` and the
/// level rounds to zero once the divisor exceeds twice the amplitude.
fn label_threshold() -> u8 {
    let sf = |q: u8| if q < 50 { 5000.0 / q as f64 } else { 200.0 - 2.0 * q as f64 };
    (1..=100u8)
        .find(|&q| {
            let d = ((68.0 * sf(q) + 50.0) / 100.0).floor().clamp(1.0, 255.0);
            35.0 / d >= 0.5
        })
        .unwrap()
}

fn synthetic_knee() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let grid = vec![95.0, 80.0, 60.0, 40.0, 20.0, 10.0];
    let cfg = synthetic(200, grid.clone(), dir.path());
    let res = ok(run_sweep(&cfg))?;
    let knee = knee_of(&cfg, &res.records)?;
    let q_star = (100.0 - label_threshold() as f64) / 100.0;
    let qs: Vec<f64> = grid.iter().map(|q| (100.0 - q) / 100.0).collect();
    let below = qs.iter().copied().filter(|&q| q <= q_star).fold(f64::NEG_INFINITY, f64::max);
    let above = qs.iter().copied().filter(|&q| q >= q_star).fold(f64::INFINITY, f64::min);
    let accs: Vec<String> = res
        .records
        .iter()
        .map(|r| format!("{}:{:.2}", r.quality, r.test_accuracy.unwrap_or(f64::NAN)))
        .collect();
    ensure(knee == below || knee == above, || {
        format!("knee Q={knee}, Q*={q_star}, neighbours {below}/{above}, accuracy {}", accs.join(" "))
    })?;
    Ok(format!("Q*={q_star:.2} (q*={}), knee Q={knee}, accuracy {}", label_threshold(), accs.join(" ")))
}

const OUTPUTS: [&str; 5] = [RESULTS_FILE, SUMMARY_JSON, SUMMARY_CSV, ACCURACY_SVG, EPOCHS_SVG];

fn snapshot(dir: &Path) -> std::result::Result<Vec<Vec<u8>>, String> {
    OUTPUTS.iter().map(|f| fs::read(dir.join(f)).map_err(|e| format!("{f}: {e}"))).collect()
}

fn reproducibility() -> Check {
    let grid = vec![95.0, 70.0, 45.0, 20.0];
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut first = synthetic(40, grid.clone(), a.path());
    first.workers = Some(1);
    let mut second = synthetic(40, grid, b.path());
    second.workers = Some(3);
    ok(run_sweep(&first))?;
    ok(run_sweep(&second))?;
    let (sa, sb) = (snapshot(a.path())?, snapshot(b.path())?);
    for (name, (x, y)) in OUTPUTS.iter().zip(sa.iter().zip(&sb)) {
        ensure(x == y, || format!("{name} differs between fresh runs"))?;
    }
    let resumed = ok(run_sweep(&first))?;
    ensure(resumed.trained == 0, || format!("resume retrained {} cells", resumed.trained))?;
    let sc = snapshot(a.path())?;
    for (name, (x, y)) in OUTPUTS.iter().zip(sa.iter().zip(&sc)) {
        ensure(x == y, || format!("{name} differs after resume"))?;
    }
    Ok(format!("{} artifacts identical across two fresh runs (1 vs 3 workers) and a resume", OUTPUTS.len()))
}

// ---------------------------------------------------------------- ingestion

fn mutate(rng: &mut ChaCha8Rng, base: &[u8]) -> Vec<u8> {
    let mut b = base.to_vec();
    match rng.random_range(0..3) {
        0 => b.truncate(rng.random_range(0..=b.len())),
        1 => {
            for _ in 0..rng.random_range(1..8) {
                if !b.is_empty() {
                    let i = rng.random_range(0..b.len());
                    b[i] = rng.random();
                }
            }
        }
        _ => b = (0..rng.random_range(0..200)).map(|_| rng.random()).collect(),
    }
    b
}

fn ingestion() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);

    let fixture = LabeledImages {
        images: (0..30)
            .map(|_| ImageRgb::new(32, 32, (0..32 * 32 * 3).map(|_| rng.random()).collect()).unwrap())
            .collect(),
        labels: (0..30).map(|i| i % 10).collect(),
    };
    let bytes = ok(cifar10_bytes(&fixture))?;
    ensure(bytes.len() == 30 * 3073, || format!("{} bytes for 30 records", bytes.len()))?;
    let parsed = ok(parse_cifar10(&bytes))?;
    ensure(parsed == fixture, || "CIFAR records changed in a round trip".into())?;
    ensure(ok(cifar10_bytes(&parsed))? == bytes, || "CIFAR bytes changed in a round trip".into())?;
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("data_batch_1.bin"), &bytes).unwrap();
    fs::write(dir.path().join("test_batch.bin"), &bytes).unwrap();
    let loaded = ok(load_cifar10(&DatasetRef {
        kind: DatasetKind::Cifar10,
        root: dir.path().to_path_buf(),
        subset: SubsetSpec::default(),
        seed: 0,
    }))?;
    ensure(loaded.train == fixture && loaded.test == fixture, || "loaded batches differ".into())?;

    let samples: Vec<i16> = (0..5000).map(|_| rng.random()).collect();
    let signal = ok(PcmSignal::new(samples, 22050))?;
    let wav = wav_bytes(&signal);
    let back = ok(parse_wav(&wav))?;
    ensure(back == signal, || "WAV samples changed in a round trip".into())?;
    ensure(wav_bytes(&back) == wav, || "WAV bytes changed in a round trip".into())?;

    let mut stereo = wav.clone();
    stereo[22] = 2;
    let mut bad_label = bytes.clone();
    bad_label[0] = 10;
    let manifest_dir = tempfile::tempdir().unwrap();
    let dup = manifest_dir.path().join("dup.csv");
    fs::write(&dup, "path,label\na.wav,x\na.wav,y\n").unwrap();
    let no_label = manifest_dir.path().join("nolabel.csv");
    fs::write(&no_label, "path\na.wav\n").unwrap();
    let cases: Vec<ErrorCase> = vec![
        ("WAV cut short", parse_wav(&wav[..wav.len() - 3]).unwrap_err(), |e| matches!(e, Error::Truncated(_))),
        ("WAV stereo", parse_wav(&stereo).unwrap_err(), |e| matches!(e, Error::UnsupportedFormat(_))),
        ("not RIFF", parse_wav(b"OggS....").unwrap_err(), |e| matches!(e, Error::UnsupportedFormat(_))),
        ("CIFAR cut short", parse_cifar10(&bytes[..3000]).unwrap_err(), |e| matches!(e, Error::Truncated(_))),
        ("CIFAR label 10", parse_cifar10(&bad_label).unwrap_err(), |e| matches!(e, Error::Dataset(_))),
        ("duplicate manifest row", read_manifest(&dup).unwrap_err(), |e| matches!(e, Error::Dataset(_))),
        ("manifest without label", read_manifest(&no_label).unwrap_err(), |e| {
            matches!(e, Error::MissingColumn(_))
        }),
        ("missing manifest", read_manifest(&manifest_dir.path().join("none.csv")).unwrap_err(), |e| {
            matches!(e, Error::MissingFile(_))
        }),
        ("sweep CSV without status", parse_sweep_csv(b"quality,Q\n1,0.99\n").unwrap_err(), |e| {
            matches!(e, Error::MissingColumn(_))
        }),
    ];
    for (name, err, want) in &cases {
        ensure(want(err), || format!("{name}: unexpected error {err:?}"))?;
    }

    let checkpoint = ok(noisebits::learner::checkpoint_bytes(&ok(Network64::new(&linear_head(), 1))?))?;
    let mut fuzzed = 0;
    for _ in 0..3000 {
        let w = mutate(&mut rng, &wav);
        let c = mutate(&mut rng, &bytes[..3073 * 2]);
        let k = mutate(&mut rng, &checkpoint);
        let r = catch_unwind(|| {
            let _ = parse_wav(&w);
            let _ = parse_cifar10(&c);
            let _ = parse_checkpoint::<f64>(&k);
            let _ = parse_sweep_csv(&c);
        });
        ensure(r.is_ok(), || "a parser panicked on malformed input".into())?;
        fuzzed += 1;
    }
    Ok(format!("CIFAR and WAV round trips exact; {} error classes; {fuzzed} fuzzed inputs without panics", cases.len()))
}

fn main() -> ExitCode {
    // Parser panics are caught and reported; keep their messages off stderr.
    std::panic::set_hook(Box::new(|_| {}));
    let criteria: Vec<Criterion> = vec![
        ("bit budget", Box::new(|| timed(Duration::from_secs(1), bit_budget))),
        ("transform round trips", Box::new(|| timed(Duration::from_secs(10), transforms))),
        ("learner gradients and parameter counts", Box::new(|| timed(Duration::from_secs(120), learner))),
        ("noise scalar estimator", Box::new(|| timed(Duration::from_secs(30), helmholtz))),
        ("curve fit and knee", Box::new(|| timed(Duration::from_secs(5), curves))),
        ("CIFAR-10 desk-scale trend", Box::new(cifar_trend)),
        ("synthetic knee", Box::new(|| timed(Duration::from_secs(600), synthetic_knee))),
        ("sweep reproducibility", Box::new(|| timed(Duration::from_secs(600), reproducibility))),
        ("ingestion", Box::new(|| timed(Duration::from_secs(60), ingestion))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let (tag, detail) = match run() {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Blocked(d) => ("BLOCKED", d),
        };
        println!("[{tag}] {} {name}: {detail}", i + 1);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
