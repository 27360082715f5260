use serde::{Deserialize, Serialize};

use crate::bits::BitBudgetModel;
use crate::error::{Error, Result};

pub const DEFAULT_KNEE_TOLERANCE: f64 = 0.05;

/// One measurement: normalized quantization `q` in `[0, 1)` and accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub q: f64,
    pub accuracy: f64,
}

impl CurvePoint {
    pub fn new(q: f64, accuracy: f64) -> Self {
        Self { q, accuracy }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyCurve {
    points: Vec<CurvePoint>,
    pub c: Option<f64>,
}

impl AccuracyCurve {
    pub fn new(points: Vec<CurvePoint>) -> Result<Self> {
        if points.iter().any(|p| !p.accuracy.is_finite() || !p.q.is_finite()) {
            return Err(Error::InvalidInput("curve points must be finite".into()));
        }
        if points.windows(2).any(|w| w[1].q <= w[0].q) {
            return Err(Error::InvalidInput("curve Q values must be strictly increasing".into()));
        }
        Ok(Self { points, c: None })
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    /// Accuracies with the `Q → 1` divergence clamped at zero, for plotting.
    pub fn plot_points(&self) -> Vec<CurvePoint> {
        self.points.iter().map(|p| CurvePoint::new(p.q, p.accuracy.max(0.0))).collect()
    }
}

/// JPEG quality → normalized quantization `(100 − q) / 100`.
pub fn quality_to_q(quality: u8) -> f64 {
    (100.0 - quality as f64) / 100.0
}

/// Inverse of [`quality_to_q`], rounded to the nearest integer quality.
pub fn q_to_quality(q: f64) -> u8 {
    (100.0 - 100.0 * q).round().clamp(1.0, 100.0) as u8
}

fn log_term(q: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::InvalidInput(format!("Q must lie in [0, 1), got {q}")));
    }
    Ok((100.0 - 100.0 * q).ln())
}

/// `c · ln(100 − 100·Q)`.
pub fn theoretical_accuracy(c: f64, q: f64) -> Result<f64> {
    Ok(c * log_term(q)?)
}

pub fn theoretical_curve(c: f64, grid: &[f64]) -> Result<AccuracyCurve> {
    let points = grid
        .iter()
        .map(|&q| Ok(CurvePoint::new(q, theoretical_accuracy(c, q)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut curve = AccuracyCurve::new(points)?;
    curve.c = Some(c);
    Ok(curve)
}

/// Least-squares scale `c = Σ a·x / Σ x²` with `x = ln(100 − 100·Q)`.
pub fn fit_curve(points: &[CurvePoint]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InsufficientPoints { needed: 2, got: points.len() });
    }
    let first = points[0].q;
    if points.iter().all(|p| p.q == first) {
        return Err(Error::DegenerateFit("all points share one Q value".into()));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for p in points {
        let x = log_term(p.q)?;
        num += p.accuracy * x;
        den += x * x;
    }
    if den == 0.0 {
        return Err(Error::DegenerateFit("every log term is zero".into()));
    }
    Ok(num / den)
}

/// Largest `Q` whose accuracy stays within `tau` of the plateau.
///
/// The plateau is the maximum of the 3-point centered moving average (two
/// points at the ends). Points must be sorted by `Q`.
pub fn detect_knee(points: &[CurvePoint], tau: f64) -> Result<f64> {
    if points.len() < 4 {
        return Err(Error::InsufficientPoints { needed: 4, got: points.len() });
    }
    if points.windows(2).any(|w| w[1].q < w[0].q) {
        return Err(Error::InvalidInput("knee detection needs points sorted by Q".into()));
    }
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::InvalidInput(format!("tolerance must lie in [0, 1), got {tau}")));
    }
    let n = points.len();
    let plateau = (0..n)
        .map(|i| {
            let window = &points[i.saturating_sub(1)..(i + 2).min(n)];
            window.iter().map(|p| p.accuracy).sum::<f64>() / window.len() as f64
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let threshold = (1.0 - tau) * plateau;
    points
        .iter()
        .rev()
        .find(|p| p.accuracy >= threshold)
        .map(|p| p.q)
        .ok_or_else(|| Error::InvalidInput("no point reaches the plateau threshold".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseBits {
    pub content_bits: f64,
    pub noise_bits: f64,
}

/// Splits the per-pixel budget at the knee quality into content and noise bits.
pub fn noise_bits_estimate(q_knee: u8, budget: &BitBudgetModel) -> Result<NoiseBits> {
    let content_bits = budget.bits_remaining(q_knee)?;
    Ok(NoiseBits { content_bits, noise_bits: budget.baseline.bits() - content_bits })
}
