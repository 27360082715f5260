use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::PcmSignal;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MelConfig {
    pub n_mels: usize,
    pub frame: usize,
    pub hop: usize,
    /// Values are clamped to `-floor_db` relative to the per-clip maximum.
    pub floor_db: f64,
}

impl Default for MelConfig {
    fn default() -> Self {
        Self { n_mels: 96, frame: 1024, hop: 512, floor_db: 80.0 }
    }
}

/// HTK mel scale.
pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters spaced evenly on the mel scale from 0 Hz to Nyquist.
#[derive(Debug, Clone)]
pub struct MelFilterbank {
    n_mels: usize,
    n_bins: usize,
    /// `(n_mels + 2)` edge frequencies in Hz; filter `b` spans `edges[b]..edges[b+2]`.
    edges: Vec<f64>,
    weights: Vec<f64>,
}

impl MelFilterbank {
    pub fn new(n_mels: usize, n_fft: usize, rate: u32) -> Self {
        let nyquist = rate as f64 / 2.0;
        let top = hz_to_mel(nyquist);
        let edges: Vec<f64> =
            (0..n_mels + 2).map(|i| mel_to_hz(top * i as f64 / (n_mels + 1) as f64)).collect();
        let n_bins = n_fft / 2 + 1;
        let mut weights = vec![0.0; n_mels * n_bins];
        for b in 0..n_mels {
            let (lo, c, hi) = (edges[b], edges[b + 1], edges[b + 2]);
            for j in 0..n_bins {
                let f = j as f64 * rate as f64 / n_fft as f64;
                let w = ((f - lo) / (c - lo)).min((hi - f) / (hi - c));
                weights[b * n_bins + j] = w.max(0.0);
            }
        }
        Self { n_mels, n_bins, edges, weights }
    }

    pub fn n_mels(&self) -> usize {
        self.n_mels
    }

    pub fn center_hz(&self, band: usize) -> f64 {
        self.edges[band + 1]
    }

    /// Frequency support `(lo, hi)` of one band in Hz.
    pub fn support_hz(&self, band: usize) -> (f64, f64) {
        (self.edges[band], self.edges[band + 2])
    }

    pub fn weights(&self, band: usize) -> &[f64] {
        &self.weights[band * self.n_bins..(band + 1) * self.n_bins]
    }

    fn apply(&self, power: &[f64], out: &mut [f64]) {
        for (b, o) in out.iter_mut().enumerate() {
            *o = self.weights(b).iter().zip(power).map(|(w, p)| w * p).sum();
        }
    }
}

/// Log-mel power in dB relative to the clip maximum, band-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MelSpectrogram {
    n_mels: usize,
    frames: usize,
    values: Vec<f32>,
}

impl MelSpectrogram {
    pub fn new(n_mels: usize, frames: usize, values: Vec<f32>) -> Result<Self> {
        if values.len() != n_mels * frames {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {n_mels}x{frames} spectrogram",
                values.len()
            )));
        }
        Ok(Self { n_mels, frames, values })
    }

    pub fn n_mels(&self) -> usize {
        self.n_mels
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn get(&self, band: usize, frame: usize) -> f32 {
        self.values[band * self.frames + frame]
    }

    /// Band with the largest value in `frame`.
    pub fn argmax_band(&self, frame: usize) -> usize {
        (0..self.n_mels)
            .max_by(|&a, &b| self.get(a, frame).total_cmp(&self.get(b, frame)))
            .unwrap_or(0)
    }
}

fn power_frames(x: &[f64], frame: usize, hop: usize, fft: &Arc<dyn Fft<f64>>) -> Vec<Vec<f64>> {
    let window: Vec<f64> = (0..frame)
        .map(|n| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / frame as f64).cos())
        .collect();
    let count = 1 + (x.len() - frame) / hop;
    let mut buf = vec![Complex::new(0.0, 0.0); frame];
    (0..count)
        .map(|f| {
            let start = f * hop;
            for ((b, s), w) in buf.iter_mut().zip(&x[start..start + frame]).zip(&window) {
                *b = Complex::new(s * w, 0.0);
            }
            fft.process(&mut buf);
            buf[..frame / 2 + 1].iter().map(|c| c.norm_sqr()).collect()
        })
        .collect()
}

pub fn mel_spectrogram(signal: &PcmSignal, cfg: &MelConfig) -> Result<MelSpectrogram> {
    if cfg.n_mels == 0 || cfg.frame < 2 || cfg.hop == 0 {
        return Err(Error::InvalidInput(format!("bad mel configuration {cfg:?}")));
    }
    if signal.len() < cfg.frame {
        return Err(Error::InvalidInput(format!(
            "signal of {} samples is shorter than one {}-sample frame",
            signal.len(),
            cfg.frame
        )));
    }
    let x: Vec<f64> = signal.samples().iter().map(|&s| s as f64 / 32768.0).collect();
    let fft = FftPlanner::new().plan_fft_forward(cfg.frame);
    let spectra = power_frames(&x, cfg.frame, cfg.hop, &fft);
    let bank = MelFilterbank::new(cfg.n_mels, cfg.frame, signal.rate());
    let frames = spectra.len();
    let mut mel = vec![0.0; cfg.n_mels * frames];
    let mut col = vec![0.0; cfg.n_mels];
    for (t, p) in spectra.iter().enumerate() {
        bank.apply(p, &mut col);
        for (b, v) in col.iter().enumerate() {
            mel[b * frames + t] = *v;
        }
    }
    let peak = mel.iter().copied().fold(0.0f64, f64::max);
    let values = mel
        .iter()
        .map(|&p| {
            let db = if peak > 0.0 && p > 0.0 { 10.0 * (p / peak).log10() } else { f64::NEG_INFINITY };
            db.max(-cfg.floor_db) as f32
        })
        .collect();
    MelSpectrogram::new(cfg.n_mels, frames, values)
}
