//! Audio side of the pipeline: PCM16 WAV I/O, the MDCT, a frequency-ramped
//! MDCT quantizer driven by a normalized quality `Q`, an adapter for external
//! MP3 encoders, and 96-band log-mel spectrograms.

mod external;
mod mdct;
mod mel;
mod quantize;
mod tensor_file;
mod wav;

pub use external::{bitrate_to_quality, external_encode, ExternalCodec};
pub use mdct::{Mdct, MdctFrames, DEFAULT_MDCT_WINDOW};
pub use mel::{hz_to_mel, mel_spectrogram, mel_to_hz, MelConfig, MelFilterbank, MelSpectrogram};
pub use quantize::{perceptual_quantize_audio, AudioQuantizer};
pub use tensor_file::{read_tensor_file, write_tensor_file};
pub use wav::{parse_wav, read_wav, wav_bytes, write_wav};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mono 16-bit PCM.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcmSignal {
    samples: Vec<i16>,
    rate: u32,
}

impl PcmSignal {
    pub fn new(samples: Vec<i16>, rate: u32) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidInput("signal has no samples".into()));
        }
        if rate == 0 {
            return Err(Error::InvalidInput("sample rate must be positive".into()));
        }
        Ok(Self { samples, rate })
    }

    pub fn samples(&self) -> &[i16] {
        &self.samples
    }

    pub fn rate(&self) -> u32 {
        self.rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.samples.iter().map(|&s| s as f64).collect()
    }

    /// Rounds and saturates real samples into a PCM signal.
    pub fn from_f64(samples: &[f64], rate: u32) -> Result<Self> {
        let pcm = samples
            .iter()
            .map(|s| s.round().clamp(i16::MIN as f64, i16::MAX as f64) as i16)
            .collect();
        Self::new(pcm, rate)
    }
}

/// Normalized audio quality: 0 is transparent, 1 the coarsest quantization.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct AudioQuality(f64);

impl AudioQuality {
    pub const TRANSPARENT: AudioQuality = AudioQuality(0.0);

    pub fn new(q: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&q) {
            Ok(Self(q))
        } else {
            Err(Error::InvalidAudioQuality(q))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for AudioQuality {
    type Error = Error;

    fn try_from(q: f64) -> Result<Self> {
        Self::new(q)
    }
}

impl From<AudioQuality> for f64 {
    fn from(q: AudioQuality) -> f64 {
        q.0
    }
}

/// Signal-to-noise ratio in dB; infinite when the signals are identical.
pub fn snr_db(reference: &[i16], test: &[i16]) -> f64 {
    assert_eq!(reference.len(), test.len());
    let (mut sig, mut err) = (0.0f64, 0.0f64);
    for (&a, &b) in reference.iter().zip(test) {
        sig += (a as f64).powi(2);
        err += (a as f64 - b as f64).powi(2);
    }
    if err == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (sig / err).log10()
    }
}
