use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};

use super::wav::{read_wav, write_wav};
use super::{AudioQuality, PcmSignal};
use crate::error::{Error, Result};

/// External MP3 encoder and decoder invoked with LAME-style flags:
/// `encoder -b <kbps> in.wav out.mp3` and `decoder --decode in.mp3 out.wav`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalCodec {
    pub encoder: PathBuf,
    pub decoder: PathBuf,
}

impl ExternalCodec {
    pub fn lame() -> Self {
        Self { encoder: "lame".into(), decoder: "lame".into() }
    }

    /// Resolves an executable either as a path or through `PATH`.
    fn resolve(program: &Path) -> Option<PathBuf> {
        if program.components().count() > 1 {
            return program.is_file().then(|| program.to_path_buf());
        }
        std::env::var_os("PATH").and_then(|paths| {
            std::env::split_paths(&paths).map(|d| d.join(program)).find(|p| p.is_file())
        })
    }

    pub fn available(&self) -> bool {
        Self::resolve(&self.encoder).is_some() && Self::resolve(&self.decoder).is_some()
    }
}

fn run(cmd: &mut Command, what: &str) -> Result<()> {
    let out = cmd.output()?;
    if !out.status.success() {
        return Err(Error::FeatureUnavailable(format!(
            "{what} failed ({}): {}",
            out.status,
            String::from_utf8_lossy(&out.stderr).trim()
        )));
    }
    Ok(())
}

/// Encode → decode round trip at `bitrate_kbps`.
///
/// The decoded signal is trimmed or zero-padded back to the input length.
pub fn external_encode(signal: &PcmSignal, bitrate_kbps: u32, codec: &ExternalCodec) -> Result<PcmSignal> {
    let encoder = ExternalCodec::resolve(&codec.encoder).ok_or_else(|| {
        Error::FeatureUnavailable(format!("encoder {} not found", codec.encoder.display()))
    })?;
    let decoder = ExternalCodec::resolve(&codec.decoder).ok_or_else(|| {
        Error::FeatureUnavailable(format!("decoder {} not found", codec.decoder.display()))
    })?;
    let work = tempfile::tempdir()?;
    let src = work.path().join("in.wav");
    let mp3 = work.path().join("coded.mp3");
    let dst = work.path().join("out.wav");
    write_wav(&src, signal)?;
    run(
        Command::new(&encoder).arg("--quiet").arg("-b").arg(bitrate_kbps.to_string()).arg(&src).arg(&mp3),
        "encoder",
    )?;
    run(Command::new(&decoder).arg("--quiet").arg("--decode").arg(&mp3).arg(&dst), "decoder")?;
    let decoded = read_wav(&dst)?;
    let mut samples = decoded.samples().to_vec();
    samples.resize(signal.len(), 0);
    PcmSignal::new(samples, signal.rate())
}

/// Linear map of a bitrate onto `Q`: the top of the ladder is `Q = 0`, the bottom `Q = 1`.
pub fn bitrate_to_quality(bitrate_kbps: u32, ladder: &[u32]) -> Result<AudioQuality> {
    let (min, max) = match (ladder.iter().min(), ladder.iter().max()) {
        (Some(&lo), Some(&hi)) if hi > lo => (lo as f64, hi as f64),
        _ => return Err(Error::InvalidInput("bitrate ladder needs two distinct rates".into())),
    };
    let rate = bitrate_kbps as f64;
    if !(min..=max).contains(&rate) {
        return Err(Error::InvalidInput(format!("bitrate {rate} outside ladder [{min}, {max}]")));
    }
    AudioQuality::new(1.0 - (rate - min) / (max - min))
}
