use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::audio::{read_wav, PcmSignal};
use crate::error::{Error, Result};
use crate::image::ImageRgb;

pub const CIFAR_SIDE: usize = 32;
pub const CIFAR_RECORD: usize = 1 + 3 * CIFAR_SIDE * CIFAR_SIDE;
pub const CIFAR_CLASSES: usize = 10;
const CIFAR_TRAIN_FILES: [&str; 5] =
    ["data_batch_1.bin", "data_batch_2.bin", "data_batch_3.bin", "data_batch_4.bin", "data_batch_5.bin"];
const CIFAR_TEST_FILE: &str = "test_batch.bin";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    /// CIFAR-10 binary batches.
    Cifar10,
    /// Mono 16-bit WAV clips listed in a `path,label` manifest.
    Audio,
    /// Generated two-class images whose label sits in one mid-frequency DCT
    /// coefficient. See [`super::synthetic_knee_images`].
    SyntheticKnee,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SubsetSpec {
    /// Original class ids to keep, relabelled `0..len` in this order.
    pub classes: Option<Vec<usize>>,
    pub train_per_class: Option<usize>,
    pub test_per_class: Option<usize>,
    /// Share of examples used for training when the source has no fixed split.
    pub train_fraction: f64,
}

impl Default for SubsetSpec {
    fn default() -> Self {
        Self { classes: None, train_per_class: None, test_per_class: None, train_fraction: 0.75 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRef {
    pub kind: DatasetKind,
    /// Batch directory, manifest file (or its directory). Unused for synthetic data.
    #[serde(default)]
    pub root: PathBuf,
    #[serde(default)]
    pub subset: SubsetSpec,
    #[serde(default)]
    pub seed: u64,
}

impl DatasetRef {
    pub fn validate(&self) -> Result<()> {
        let s = &self.subset;
        if s.train_per_class == Some(0) || s.test_per_class == Some(0) {
            return Err(Error::Config("per-class caps must be at least 1".into()));
        }
        if !(s.train_fraction > 0.0 && s.train_fraction < 1.0) {
            return Err(Error::Config(format!("train fraction must lie in (0, 1), got {}", s.train_fraction)));
        }
        if let Some(c) = &s.classes {
            if c.is_empty() || c.iter().collect::<HashSet<_>>().len() != c.len() {
                return Err(Error::Config("class list must be non-empty without repeats".into()));
            }
        }
        if self.kind == DatasetKind::SyntheticKnee && (s.train_per_class.is_none() || s.test_per_class.is_none()) {
            return Err(Error::Config("synthetic data needs train_per_class and test_per_class".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledImages {
    pub images: Vec<ImageRgb>,
    pub labels: Vec<usize>,
}

impl LabeledImages {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn pick(&self, idx: &[usize]) -> Self {
        Self {
            images: idx.iter().map(|&i| self.images[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageDataset {
    pub train: LabeledImages,
    pub test: LabeledImages,
    pub classes: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledAudio {
    pub signals: Vec<PcmSignal>,
    pub labels: Vec<usize>,
    pub paths: Vec<PathBuf>,
}

impl LabeledAudio {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AudioDataset {
    pub train: LabeledAudio,
    pub test: LabeledAudio,
    pub class_names: Vec<String>,
}

/// Parses CIFAR-10 binary records: a label byte, then the red, green and
/// blue 32×32 planes, row-major.
pub fn parse_cifar10(bytes: &[u8]) -> Result<LabeledImages> {
    if !bytes.len().is_multiple_of(CIFAR_RECORD) {
        return Err(Error::Truncated(format!(
            "CIFAR-10 data of {} bytes is not a whole number of {CIFAR_RECORD}-byte records",
            bytes.len()
        )));
    }
    let plane = CIFAR_SIDE * CIFAR_SIDE;
    let mut out = LabeledImages::default();
    for (i, rec) in bytes.chunks_exact(CIFAR_RECORD).enumerate() {
        let label = rec[0] as usize;
        if label >= CIFAR_CLASSES {
            return Err(Error::Dataset(format!("record {i} has label {label}")));
        }
        let mut px = Vec::with_capacity(3 * plane);
        for p in 0..plane {
            px.extend_from_slice(&[rec[1 + p], rec[1 + plane + p], rec[1 + 2 * plane + p]]);
        }
        out.images.push(ImageRgb::new(CIFAR_SIDE, CIFAR_SIDE, px)?);
        out.labels.push(label);
    }
    Ok(out)
}

/// Inverse of [`parse_cifar10`].
pub fn cifar10_bytes(data: &LabeledImages) -> Result<Vec<u8>> {
    let plane = CIFAR_SIDE * CIFAR_SIDE;
    let mut out = Vec::with_capacity(data.len() * CIFAR_RECORD);
    for (img, &label) in data.images.iter().zip(&data.labels) {
        if img.width() != CIFAR_SIDE || img.height() != CIFAR_SIDE || label >= CIFAR_CLASSES {
            return Err(Error::InvalidInput("CIFAR-10 records are 32×32 with labels below 10".into()));
        }
        out.push(label as u8);
        for c in 0..3 {
            out.extend((0..plane).map(|p| img.pixels()[3 * p + c]));
        }
    }
    Ok(out)
}

fn read_existing(path: &Path) -> Result<Vec<u8>> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    Ok(fs::read(path)?)
}

/// Keeps the chosen classes (relabelled), then at most `cap` examples per
/// class chosen by a seeded shuffle. Original order is preserved.
fn select(labels: &[usize], classes: &[usize], cap: Option<usize>, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let mut chosen = Vec::new();
    for &c in classes {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        if let Some(cap) = cap {
            idx.shuffle(rng);
            idx.truncate(cap);
        }
        chosen.extend(idx);
    }
    chosen.sort_unstable();
    let relabel: BTreeMap<usize, usize> = classes.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let new_labels = chosen.iter().map(|&i| relabel[&labels[i]]).collect();
    (chosen, new_labels)
}

fn cifar_dir(root: &Path) -> PathBuf {
    let nested = root.join("cifar-10-batches-bin");
    if nested.is_dir() {
        nested
    } else {
        root.to_path_buf()
    }
}

/// Loads the standard training batches (those present) and the test batch.
pub fn load_cifar10(r: &DatasetRef) -> Result<ImageDataset> {
    r.validate()?;
    let dir = cifar_dir(&r.root);
    let mut train = LabeledImages::default();
    for name in CIFAR_TRAIN_FILES {
        let path = dir.join(name);
        if path.is_file() {
            let part = parse_cifar10(&read_existing(&path)?)?;
            train.images.extend(part.images);
            train.labels.extend(part.labels);
        }
    }
    if train.is_empty() {
        return Err(Error::MissingFile(dir.join(CIFAR_TRAIN_FILES[0])));
    }
    let test = parse_cifar10(&read_existing(&dir.join(CIFAR_TEST_FILE))?)?;
    let classes: Vec<usize> = r.subset.classes.clone().unwrap_or_else(|| (0..CIFAR_CLASSES).collect());
    if let Some(&bad) = classes.iter().find(|&&c| c >= CIFAR_CLASSES) {
        return Err(Error::Config(format!("class {bad} does not exist in CIFAR-10")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
    let (ti, tl) = select(&train.labels, &classes, r.subset.train_per_class, &mut rng);
    let (vi, vl) = select(&test.labels, &classes, r.subset.test_per_class, &mut rng);
    let mut train = train.pick(&ti);
    train.labels = tl;
    let mut test = test.pick(&vi);
    test.labels = vl;
    Ok(ImageDataset { train, test, classes: classes.len() })
}

#[derive(Debug, Deserialize)]
struct ManifestRow {
    path: PathBuf,
    label: String,
}

/// Reads a `path,label` manifest; paths are relative to the manifest.
pub fn read_manifest(manifest: &Path) -> Result<Vec<(PathBuf, String)>> {
    let bytes = read_existing(manifest)?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut reader = csv::Reader::from_reader(bytes.as_slice());
    let headers = reader.headers()?.clone();
    for col in ["path", "label"] {
        if !headers.iter().any(|h| h == col) {
            return Err(Error::MissingColumn(col.into()));
        }
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for row in reader.deserialize::<ManifestRow>() {
        let row = row?;
        if !seen.insert(row.path.clone()) {
            return Err(Error::Dataset(format!("{} is listed twice in the manifest", row.path.display())));
        }
        out.push((base.join(&row.path), row.label));
    }
    if out.is_empty() {
        return Err(Error::Dataset(format!("{} lists no files", manifest.display())));
    }
    Ok(out)
}

/// Loads every clip in the manifest and splits them with a seeded shuffle,
/// `round(fraction · n)` for training. `train_per_class` caps each class
/// before the split.
pub fn load_audio_dataset(r: &DatasetRef) -> Result<AudioDataset> {
    r.validate()?;
    let manifest = if r.root.is_dir() { r.root.join("manifest.csv") } else { r.root.clone() };
    let rows = read_manifest(&manifest)?;
    let mut class_names: Vec<String> = rows.iter().map(|(_, l)| l.clone()).collect();
    class_names.sort();
    class_names.dedup();
    let class_of: BTreeMap<&str, usize> = class_names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let labels: Vec<usize> = rows.iter().map(|(_, l)| class_of[l.as_str()]).collect();

    let keep: Vec<usize> = r.subset.classes.clone().unwrap_or_else(|| (0..class_names.len()).collect());
    if let Some(&bad) = keep.iter().find(|&&c| c >= class_names.len()) {
        return Err(Error::Config(format!("class {bad} does not exist in the manifest")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
    let (mut chosen, new_labels) = select(&labels, &keep, r.subset.train_per_class, &mut rng);
    let label_of: BTreeMap<usize, usize> = chosen.iter().copied().zip(new_labels).collect();
    chosen.shuffle(&mut rng);
    let n_train = (r.subset.train_fraction * chosen.len() as f64).round() as usize;
    let load = |idx: &[usize]| -> Result<LabeledAudio> {
        let mut out = LabeledAudio::default();
        for &i in idx {
            let path = &rows[i].0;
            if !path.is_file() {
                return Err(Error::MissingFile(path.clone()));
            }
            out.signals.push(read_wav(path)?);
            out.labels.push(label_of[&i]);
            out.paths.push(path.clone());
        }
        Ok(out)
    };
    let (tr, te) = chosen.split_at(n_train);
    let (mut tr, mut te) = (tr.to_vec(), te.to_vec());
    tr.sort_unstable();
    te.sort_unstable();
    let names = keep.iter().map(|&c| class_names[c].clone()).collect();
    Ok(AudioDataset { train: load(&tr)?, test: load(&te)?, class_names: names })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::write_wav;

    fn fixture() -> LabeledImages {
        let a: Vec<u8> = (0..3072).map(|i| (i % 251) as u8).collect();
        let b: Vec<u8> = (0..3072).map(|i| (i * 7 % 256) as u8).collect();
        LabeledImages {
            images: vec![ImageRgb::new(32, 32, a).unwrap(), ImageRgb::new(32, 32, b).unwrap()],
            labels: vec![3, 9],
        }
    }

    #[test]
    fn cifar_record_layout() {
        let data = fixture();
        let bytes = cifar10_bytes(&data).unwrap();
        assert_eq!(bytes.len(), 2 * 3073);
        assert_eq!(bytes[0], 3);
        // first red byte is pixel 0 channel 0; first green byte is pixel 0 channel 1
        assert_eq!(bytes[1], data.images[0].pixels()[0]);
        assert_eq!(bytes[1 + 1024], data.images[0].pixels()[1]);
        assert_eq!(bytes[1 + 2048 + 5], data.images[0].pixels()[3 * 5 + 2]);
        assert_eq!(parse_cifar10(&bytes).unwrap(), data);
    }

    #[test]
    fn cifar_malformed() {
        assert!(matches!(parse_cifar10(&[0u8; 3072]), Err(Error::Truncated(_))));
        let mut bytes = vec![0u8; 3073];
        bytes[0] = 10;
        assert!(matches!(parse_cifar10(&bytes), Err(Error::Dataset(_))));
    }

    fn write_cifar_dir(dir: &Path) {
        let mut train = LabeledImages::default();
        for i in 0..60 {
            train.images.push(ImageRgb::filled(32, 32, [i as u8, 0, 0]).unwrap());
            train.labels.push(i % 3);
        }
        fs::write(dir.join("data_batch_1.bin"), cifar10_bytes(&train).unwrap()).unwrap();
        let test = train.pick(&(0..30).collect::<Vec<_>>());
        fs::write(dir.join("test_batch.bin"), cifar10_bytes(&test).unwrap()).unwrap();
    }

    #[test]
    fn seeded_subset_repeatable() {
        let dir = tempfile::tempdir().unwrap();
        write_cifar_dir(dir.path());
        let r = DatasetRef {
            kind: DatasetKind::Cifar10,
            root: dir.path().into(),
            subset: SubsetSpec { classes: Some(vec![2, 0]), train_per_class: Some(5), test_per_class: Some(3), ..Default::default() },
            seed: 1,
        };
        let a = load_cifar10(&r).unwrap();
        assert_eq!(a, load_cifar10(&r).unwrap());
        assert_eq!((a.train.len(), a.test.len(), a.classes), (10, 6, 2));
        // class 2 became 0: its images have red values ≡ 2 mod 3
        for (img, &l) in a.train.images.iter().zip(&a.train.labels) {
            let red = img.pixels()[0] as usize;
            assert_eq!(if l == 0 { 2 } else { 0 }, red % 3);
        }
        let other = load_cifar10(&DatasetRef { seed: 2, ..r.clone() }).unwrap();
        assert_ne!(a.train, other.train);
    }

    #[test]
    fn missing_batches() {
        let dir = tempfile::tempdir().unwrap();
        let r = DatasetRef { kind: DatasetKind::Cifar10, root: dir.path().into(), subset: Default::default(), seed: 0 };
        assert!(matches!(load_cifar10(&r), Err(Error::MissingFile(_))));
    }

    fn audio_fixture(dir: &Path, manifest: &str) -> DatasetRef {
        for (i, name) in ["a.wav", "b.wav", "c.wav", "d.wav"].iter().enumerate() {
            let s = PcmSignal::new(vec![i as i16; 2048], 8000).unwrap();
            write_wav(&dir.join(name), &s).unwrap();
        }
        fs::write(dir.join("manifest.csv"), manifest).unwrap();
        DatasetRef { kind: DatasetKind::Audio, root: dir.into(), subset: Default::default(), seed: 0 }
    }

    #[test]
    fn audio_split_three_to_one() {
        let dir = tempfile::tempdir().unwrap();
        let r = audio_fixture(dir.path(), "path,label\na.wav,dist\nb.wav,clean\nc.wav,dist\nd.wav,clean\n");
        let d = load_audio_dataset(&r).unwrap();
        assert_eq!((d.train.len(), d.test.len()), (3, 1));
        assert_eq!(d.class_names, vec!["clean", "dist"]);
        for (s, &l) in d.train.signals.iter().chain(&d.test.signals).zip(d.train.labels.iter().chain(&d.test.labels)) {
            // a, c carry samples 0 and 2 and label "dist" (1)
            assert_eq!(l, if s.samples()[0] % 2 == 0 { 1 } else { 0 });
        }
        assert_eq!(d, load_audio_dataset(&r).unwrap());
    }

    #[test]
    fn audio_manifest_errors() {
        let dir = tempfile::tempdir().unwrap();
        let r = audio_fixture(dir.path(), "path,label\na.wav,x\nmissing.wav,y\n");
        match load_audio_dataset(&r) {
            Err(Error::MissingFile(p)) => assert!(p.ends_with("missing.wav")),
            other => panic!("{other:?}"),
        }
        let r = audio_fixture(dir.path(), "path,label\na.wav,x\na.wav,y\n");
        assert!(matches!(load_audio_dataset(&r), Err(Error::Dataset(_))));
        let r = audio_fixture(dir.path(), "file,label\na.wav,x\n");
        assert!(matches!(load_audio_dataset(&r), Err(Error::MissingColumn(_))));
    }
}
