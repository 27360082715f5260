//! Bits-per-pixel arithmetic for JPEG quality levels.
//!
//! The loss at quality `q` is `log2(S · sf(q) / 100)` where `S` is a table-sum
//! constant and `sf` the continuous quality scaling law. The default constant
//! 12487 reproduces the reference figures (13.6 bits at q=50, 12.2 at q=80,
//! 1.4 remaining at q=25, 1 bit at q=19). [`SumConstant::AnnexK`] uses the sum
//! actually obtained from the Annex K tables (ΣK.1 + 2·ΣK.2 = 14698).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{scale_factor, validate_quality, K1_LUMINANCE, K2_CHROMINANCE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SumConstant {
    /// 12487.
    Published,
    /// ΣK.1 + 2·ΣK.2 of the Annex K tables.
    AnnexK,
    Custom(f64),
}

impl SumConstant {
    pub const PUBLISHED: f64 = 12487.0;

    pub fn value(self) -> f64 {
        match self {
            SumConstant::Published => Self::PUBLISHED,
            SumConstant::AnnexK => {
                let k1: u32 = K1_LUMINANCE.iter().map(|&v| v as u32).sum();
                let k2: u32 = K2_CHROMINANCE.iter().map(|&v| v as u32).sum();
                (k1 + 2 * k2) as f64
            }
            SumConstant::Custom(s) => s,
        }
    }
}

/// Bits per pixel before quantization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Baseline {
    /// 4:2:0 YUV, 8 + 4 + 4 bits.
    Subsampled16,
    /// Full RGB, 24 bits.
    Full24,
}

impl Baseline {
    pub fn bits(self) -> f64 {
        match self {
            Baseline::Subsampled16 => 16.0,
            Baseline::Full24 => 24.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BitBudgetModel {
    pub sum_constant: SumConstant,
    pub baseline: Baseline,
}

impl Default for BitBudgetModel {
    fn default() -> Self {
        Self { sum_constant: SumConstant::Published, baseline: Baseline::Subsampled16 }
    }
}

impl BitBudgetModel {
    pub fn annex_k() -> Self {
        Self { sum_constant: SumConstant::AnnexK, ..Self::default() }
    }

    fn check(&self) -> Result<f64> {
        let s = self.sum_constant.value();
        if s.is_finite() && s > 0.0 {
            Ok(s)
        } else {
            Err(Error::InvalidInput(format!("sum constant must be positive, got {s}")))
        }
    }

    /// Bits per pixel removed by quantization at quality `q`. Zero at q=100.
    pub fn bits_lost(&self, q: u8) -> Result<f64> {
        let s = self.check()?;
        let sf = scale_factor(q)?;
        if sf == 0.0 {
            return Ok(0.0);
        }
        Ok((s * sf / 100.0).log2().max(0.0))
    }

    /// `baseline − bits_lost`, clamped to `[0, baseline]`.
    pub fn bits_remaining(&self, q: u8) -> Result<f64> {
        let base = self.baseline.bits();
        Ok((base - self.bits_lost(q)?).clamp(0.0, base))
    }

    /// Integer quality whose remaining budget lies closest to `target`.
    ///
    /// Ties go to the higher quality. Exact budgets map back to their own
    /// quality because `bits_remaining` is strictly increasing on `1..=99`.
    pub fn quality_for_bits(&self, target: f64) -> Result<u8> {
        let base = self.baseline.bits();
        if !(target.is_finite() && target > 0.0 && target < base) {
            return Err(Error::UnreachableTarget { target, baseline: base });
        }
        let mut best = (f64::INFINITY, 0u8);
        for q in 1..=100u8 {
            let gap = (self.bits_remaining(q)? - target).abs();
            if gap <= best.0 {
                best = (gap, q);
            }
        }
        Ok(best.1)
    }

    /// One `(quality, bits_lost, bits_remaining)` row per quality.
    pub fn table(&self, qualities: impl IntoIterator<Item = u8>) -> Result<Vec<BitRow>> {
        qualities
            .into_iter()
            .map(|q| {
                Ok(BitRow {
                    quality: validate_quality(q as i64)?,
                    bits_lost: self.bits_lost(q)?,
                    bits_remaining: self.bits_remaining(q)?,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BitRow {
    pub quality: u8,
    pub bits_lost: f64,
    pub bits_remaining: f64,
}

/// Writes rows as `quality,bits_lost,bits_remaining` CSV with `decimals` places.
pub fn write_bits_csv<W: std::io::Write>(rows: &[BitRow], out: W, decimals: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["quality", "bits_lost", "bits_remaining"])?;
    for r in rows {
        w.write_record([
            r.quality.to_string(),
            format!("{:.*}", decimals, r.bits_lost),
            format!("{:.*}", decimals, r.bits_remaining),
        ])?;
    }
    w.flush()?;
    Ok(())
}
