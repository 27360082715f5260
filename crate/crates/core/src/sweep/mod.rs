//! Quality sweeps: transcode a dataset at each grid point, train fresh models,
//! and summarize accuracy against normalized quantization.

mod dataset;
mod run;
mod summary;
mod synth;

pub use dataset::{
    cifar10_bytes, load_audio_dataset, load_cifar10, parse_cifar10, read_manifest, AudioDataset, DatasetKind,
    DatasetRef, ImageDataset, LabeledAudio, LabeledImages, SubsetSpec, CIFAR_CLASSES, CIFAR_RECORD,
};
pub use run::{
    images_to_tensor, parse_sweep_csv, prepare_audio, prepare_images, read_sweep_csv, run_cell, run_sweep,
    write_sweep_csv, ArchRef, AudioPrep, CellCurve, CellStatus, Prepared, SweepConfig, SweepRecord, SweepResult,
    ACCURACY_SVG, CSV_HEADER, CURVES_FILE, EPOCHS_SVG, RESULTS_FILE, SUMMARY_CSV, SUMMARY_JSON, WORKERS_ENV,
};
pub use summary::{summarize, summarize_lenient, write_summary_csv, ArchSummary, Domain, SummaryPoint, SummaryReport, MIN_POINTS};
pub use synth::{synthetic_knee_images, LABEL_AMPLITUDE, LABEL_COEFF};
