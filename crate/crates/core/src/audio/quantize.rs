use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::mdct::{Mdct, DEFAULT_MDCT_WINDOW};
use super::{AudioQuality, PcmSignal};
use crate::error::Result;
use crate::helmholtz::shannon_entropy;

/// MDCT-domain quantizer with step sizes
/// `base · (1 + freq_ramp·(k/bins)²) · (1 + quality_ramp·Q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AudioQuantizer {
    pub base_step: f64,
    pub freq_ramp: f64,
    pub quality_ramp: f64,
    pub window: usize,
}

impl Default for AudioQuantizer {
    fn default() -> Self {
        Self { base_step: 1.0, freq_ramp: 9.0, quality_ramp: 31.0, window: DEFAULT_MDCT_WINDOW }
    }
}

impl AudioQuantizer {
    pub fn step(&self, bin: usize, bins: usize, quality: AudioQuality) -> f64 {
        let f = bin as f64 / bins as f64;
        self.base_step * (1.0 + self.freq_ramp * f * f) * (1.0 + self.quality_ramp * quality.value())
    }

    pub fn apply(&self, signal: &PcmSignal, quality: AudioQuality) -> Result<PcmSignal> {
        Ok(self.apply_with_entropy(signal, quality)?.0)
    }

    /// Also returns the Shannon entropy of the quantized levels, in bits per
    /// coefficient.
    pub fn apply_with_entropy(&self, signal: &PcmSignal, quality: AudioQuality) -> Result<(PcmSignal, f64)> {
        let mdct = Mdct::<f64>::new(self.window);
        let bins = mdct.bins();
        let steps: Vec<f64> = (0..bins).map(|k| self.step(k, bins, quality)).collect();
        let mut frames = mdct.forward(&signal.to_f64());
        let mut hist: BTreeMap<i64, u64> = BTreeMap::new();
        for frame in &mut frames.coeffs {
            for (c, s) in frame.iter_mut().zip(&steps) {
                let level = (*c / s).round();
                *hist.entry(level as i64).or_default() += 1;
                *c = level * s;
            }
        }
        let counts: Vec<u64> = hist.into_values().collect();
        let entropy = shannon_entropy(&counts)?;
        Ok((PcmSignal::from_f64(&mdct.inverse(&frames), signal.rate())?, entropy))
    }
}

/// [`AudioQuantizer::apply`] with the default configuration.
pub fn perceptual_quantize_audio(signal: &PcmSignal, quality: AudioQuality) -> Result<PcmSignal> {
    AudioQuantizer::default().apply(signal, quality)
}
