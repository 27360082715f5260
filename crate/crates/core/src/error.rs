use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("quality {0} is outside 1..=100")]
    InvalidQuality(i64),

    #[error("audio quality {0} is outside [0, 1]")]
    InvalidAudioQuality(f64),

    #[error("target of {target} bits per pixel is unreachable (valid range is (0, {baseline}))")]
    UnreachableTarget { target: f64, baseline: f64 },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("truncated data: {0}")]
    Truncated(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Diverged { epoch: usize, loss: f64 },

    #[error("noise scalar is undefined when content entropy is zero")]
    UndefinedNoise,

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("insufficient points: need at least {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("feature unavailable: {0}")]
    FeatureUnavailable(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
