use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use super::entropy::distribution_entropy;
use crate::error::{Error, Result};

/// A sensor with maximum reading `r_max` and noise scalar `n`.
///
/// `jitter` is the standard deviation of additive zero-mean Gaussian noise,
/// as a fraction of `r_max`. The sampling period is normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    pub r_max: f64,
    pub n: f64,
    #[serde(default)]
    pub jitter: f64,
}

impl SensorModel {
    pub fn new(r_max: f64, n: f64, jitter: f64) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::InvalidInput(format!("r_max must be positive, got {r_max}")));
        }
        if !(n.is_finite() && n >= 0.0) {
            return Err(Error::InvalidInput(format!("noise scalar must be >= 0, got {n}")));
        }
        if !(jitter.is_finite() && jitter >= 0.0) {
            return Err(Error::InvalidInput(format!("jitter must be >= 0, got {jitter}")));
        }
        Ok(Self { r_max, n, jitter })
    }
}

/// Discrete symbol distribution that drives the information term of a reading.
#[derive(Debug, Clone, PartialEq)]
pub struct ContentSource {
    probs: Vec<f64>,
}

impl ContentSource {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("probability {p} is not in [0, 1]")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Self { probs })
    }

    pub fn uniform(symbols: usize) -> Result<Self> {
        if symbols == 0 {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        Self::new(vec![1.0 / symbols as f64; symbols])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `−log2 p` of symbol `i`.
    pub fn surprisal(&self, i: usize) -> f64 {
        let p = self.probs[i];
        if p >= 1.0 {
            0.0
        } else {
            -p.log2()
        }
    }

    pub fn entropy(&self) -> f64 {
        distribution_entropy(&self.probs)
    }
}

/// Draws `count` readings `r_max − n·h + jitter`, `h` the surprisal of a sampled symbol.
pub fn synthesize_readings(
    model: &SensorModel,
    source: &ContentSource,
    count: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidInput("reading count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let symbols = WeightedIndex::new(source.probs())
        .map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let jitter = if model.jitter > 0.0 {
        Some(
            Normal::new(0.0, model.jitter * model.r_max)
                .map_err(|e| Error::InvalidInput(e.to_string()))?,
        )
    } else {
        None
    };
    Ok((0..count)
        .map(|_| {
            let h = source.surprisal(symbols.sample(&mut rng));
            let e = jitter.as_ref().map_or(0.0, |d| d.sample(&mut rng));
            model.r_max - model.n * h + e
        })
        .collect())
}

/// Moment estimator `mean(r_max − r) / H`.
pub fn estimate_noise_scalar(readings: &[f64], r_max: f64, h: f64) -> Result<f64> {
    if readings.is_empty() {
        return Err(Error::InvalidInput("no readings".into()));
    }
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::UndefinedNoise);
    }
    let deficit = readings.iter().map(|r| r_max - r).sum::<f64>() / readings.len() as f64;
    Ok(deficit / h)
}

/// Content estimate `(r_max − reading) / n_approx` for one reading.
pub fn approx_content(reading: f64, r_max: f64, n_approx: f64) -> Result<f64> {
    if n_approx <= 0.0 || !n_approx.is_finite() {
        return Err(Error::InvalidInput(format!(
            "approximated noise must be positive, got {n_approx}"
        )));
    }
    Ok((r_max - reading) / n_approx)
}
