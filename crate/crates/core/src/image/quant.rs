use super::dct::CoeffBlock;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Annex K.1 luminance table, natural order.
#[rustfmt::skip]
pub const K1_LUMINANCE: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61,
    12, 12, 14, 19, 26, 58, 60, 55,
    14, 13, 16, 24, 40, 57, 69, 56,
    14, 17, 22, 29, 51, 87, 80, 62,
    18, 22, 37, 56, 68, 109, 103, 77,
    24, 35, 55, 64, 81, 104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101,
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// Annex K.2 chrominance table, natural order.
#[rustfmt::skip]
pub const K2_CHROMINANCE: [u16; 64] = [
    17, 18, 24, 47, 99, 99, 99, 99,
    18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99,
    47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
];

/// Zig-zag scan position `i` → natural index.
#[rustfmt::skip]
pub const ZIGZAG: [usize; 64] = [
     0,  1,  8, 16,  9,  2,  3, 10,
    17, 24, 32, 25, 18, 11,  4,  5,
    12, 19, 26, 33, 40, 48, 41, 34,
    27, 20, 13,  6,  7, 14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36,
    29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46,
    53, 60, 61, 54, 47, 55, 62, 63,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableRole {
    Luminance,
    Chrominance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleMode {
    /// `entry · sf / 100`, real-valued and unclamped.
    Continuous,
    /// `⌊(entry · sf + 50) / 100⌋` clamped to `[1, 255]`.
    Integer,
}

/// 64 quantization divisors in natural order.
///
/// Divisors are stored as reals so the continuous scaling mode can be
/// represented; integer-mode tables only ever hold whole numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantTable {
    role: TableRole,
    divisors: [f64; 64],
}

impl QuantTable {
    pub fn new(role: TableRole, divisors: [f64; 64]) -> Result<Self> {
        if let Some(bad) = divisors.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "quantization divisors must be positive, found {bad}"
            )));
        }
        Ok(Self { role, divisors })
    }

    pub fn luminance() -> Self {
        Self::from_u16(TableRole::Luminance, &K1_LUMINANCE)
    }

    pub fn chrominance() -> Self {
        Self::from_u16(TableRole::Chrominance, &K2_CHROMINANCE)
    }

    fn from_u16(role: TableRole, t: &[u16; 64]) -> Self {
        Self { role, divisors: t.map(f64::from) }
    }

    pub fn role(&self) -> TableRole {
        self.role
    }

    pub fn divisors(&self) -> &[f64; 64] {
        &self.divisors
    }

    pub fn sum(&self) -> f64 {
        self.divisors.iter().sum()
    }
}

/// Rejects qualities outside `1..=100`.
pub fn validate_quality(q: i64) -> Result<u8> {
    if (1..=100).contains(&q) {
        Ok(q as u8)
    } else {
        Err(Error::InvalidQuality(q))
    }
}

/// The reference JPEG quality scaling law, in percent.
pub fn scale_factor(q: u8) -> Result<f64> {
    let q = validate_quality(q as i64)?;
    Ok(if q < 50 {
        5000.0 / q as f64
    } else {
        200.0 - 2.0 * q as f64
    })
}

pub fn scale_quant_table(base: &QuantTable, q: u8, mode: ScaleMode) -> Result<QuantTable> {
    let sf = scale_factor(q)?;
    let divisors = base.divisors.map(|e| match mode {
        ScaleMode::Continuous => e * sf / 100.0,
        ScaleMode::Integer => ((e * sf + 50.0) / 100.0).floor().clamp(1.0, 255.0),
    });
    // Continuous mode at q=100 yields zero divisors; only budget arithmetic reads those.
    Ok(QuantTable { role: base.role, divisors })
}

/// Quantized coefficient levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantizedBlock(pub [i32; 64]);

/// `round(c / t)` per coefficient, ties away from zero.
pub fn quantize_block<T: Scalar>(coeffs: &CoeffBlock<T>, table: &QuantTable) -> QuantizedBlock {
    let mut out = [0i32; 64];
    for ((o, c), t) in out.iter_mut().zip(coeffs.0.iter()).zip(table.divisors.iter()) {
        *o = (c.as_f64() / t).round() as i32;
    }
    QuantizedBlock(out)
}

pub fn dequantize_block<T: Scalar>(levels: &QuantizedBlock, table: &QuantTable) -> CoeffBlock<T> {
    let mut out = [T::zero(); 64];
    for ((o, l), t) in out.iter_mut().zip(levels.0.iter()).zip(table.divisors.iter()) {
        *o = T::lit(*l as f64 * t);
    }
    CoeffBlock(out)
}
