use std::fs;

use std::path::Path;

use noisebits::audio::{write_wav, MelConfig, PcmSignal};
use noisebits::bits::BitBudgetModel;
use noisebits::image::transcode_image;
use noisebits::learner::{LayerSpec, ModelSpec, TrainConfig};
use noisebits::sweep::{
    images_to_tensor, prepare_images, run_sweep, synthetic_knee_images, ArchRef, DatasetKind, DatasetRef, Domain,
    ImageDataset, SubsetSpec, SummaryReport, SweepConfig, ACCURACY_SVG, EPOCHS_SVG, RESULTS_FILE, SUMMARY_JSON,
};

fn linear() -> ArchRef {
    ArchRef::Custom(ModelSpec::new(
        "linear",
        [3, 32, 32],
        vec![LayerSpec::Flatten, LayerSpec::Dense { units: 2 }, LayerSpec::Softmax],
    ))
}

fn synthetic(out: &std::path::Path, grid: Vec<f64>, per_class: usize) -> SweepConfig {
    SweepConfig {
        dataset: DatasetRef {
            kind: DatasetKind::SyntheticKnee,
            root: Default::default(),
            subset: SubsetSpec { train_per_class: Some(per_class), test_per_class: Some(per_class / 2), ..Default::default() },
            seed: 7,
        },
        grid,
        archs: vec![linear()],
        seeds: vec![1],
        train: TrainConfig { learning_rate: 0.01, batch_size: 16, max_epochs: 8, ..Default::default() },
        output_dir: out.to_path_buf(),
        workers: Some(2),
        record_wall_time: false,
        budget: Default::default(),
        audio: Default::default(),
        knee_tolerance: 0.05,
    }
}

#[test]
fn two_point_sweep_bookkeeping() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = synthetic(dir.path(), vec![95.0, 25.0], 20);
    let r = run_sweep(&cfg).unwrap();
    assert_eq!(r.records.len(), 2);
    assert!(r.records.iter().all(|x| (0.0..=1.0).contains(&x.test_accuracy.unwrap())));
    for f in [RESULTS_FILE, SUMMARY_JSON, ACCURACY_SVG, EPOCHS_SVG] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let csv = fs::read_to_string(dir.path().join(RESULTS_FILE)).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn transcoded_tensors_are_stable() {
    let data = ImageDataset {
        train: synthetic_knee_images(6, 32, 1).unwrap(),
        test: synthetic_knee_images(4, 32, 2).unwrap(),
        classes: 2,
    };
    let budget = BitBudgetModel::default();
    let a = prepare_images(&data, 40, &budget).unwrap();
    let b = prepare_images(&data, 40, &budget).unwrap();
    assert_eq!(a.train.inputs, b.train.inputs);
    assert_eq!(a.test.inputs, b.test.inputs);
    let direct: Vec<_> = data.train.images.iter().map(|img| transcode_image(img, 40).unwrap().0).collect();
    assert_eq!(images_to_tensor(&direct).unwrap(), a.train.inputs);
    assert_eq!(a.input, [3, 32, 32]);
    assert_eq!(a.bits_per_pixel, budget.bits_remaining(40).unwrap());
}

fn tone_corpus(dir: &Path) {
    let mut manifest = String::from("path,label\n");
    for (label, freq) in [("low", 300.0), ("high", 5000.0)] {
        for k in 0..8 {
            let amp = 4000.0 + 500.0 * k as f64;
            let x: Vec<f64> =
                (0..4096).map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / 22050.0).sin()).collect();
            let name = format!("{label}{k}.wav");
            write_wav(&dir.join(&name), &PcmSignal::from_f64(&x, 22050).unwrap()).unwrap();
            manifest.push_str(&format!("{name},{label}\n"));
        }
    }
    fs::write(dir.join("manifest.csv"), manifest).unwrap();
}

#[test]
fn audio_sweep_separates_tones() {
    let data = tempfile::tempdir().unwrap();
    tone_corpus(data.path());
    let out = tempfile::tempdir().unwrap();
    let mut cfg = synthetic(out.path(), vec![0.0, 0.3, 0.6, 0.9], 8);
    cfg.dataset = DatasetRef { kind: DatasetKind::Audio, root: data.path().to_path_buf(), subset: SubsetSpec::default(), seed: 3 };
    cfg.audio.mel = MelConfig { n_mels: 32, frame: 512, hop: 256, floor_db: 80.0 };
    cfg.train.max_epochs = 15;
    let r = run_sweep(&cfg).unwrap();
    assert_eq!(r.records.len(), 4);
    assert_eq!(r.failed, 0);
    // Q = 0 keeps the tones intact.
    assert!(r.records[0].test_accuracy.unwrap() >= 0.99, "{:?}", r.records[0]);
    let bpp: Vec<f64> = r.records.iter().map(|x| x.bits_per_pixel).collect();
    assert!(bpp.windows(2).all(|w| w[1] <= w[0]), "{bpp:?}");
    let report: SummaryReport = serde_json::from_str(&fs::read_to_string(out.path().join(SUMMARY_JSON)).unwrap()).unwrap();
    assert_eq!(report.domain, Domain::Audio);
}
