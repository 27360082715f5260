use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::color::{rgb_to_yuv420, yuv420_to_rgb};
use super::dct::{forward_dct, inverse_dct};
use super::quant::{
    dequantize_block, quantize_block, scale_quant_table, QuantTable, ScaleMode,
};
use super::{ImageRgb, ImageYuv420, Plane};
use crate::error::Result;
use crate::helmholtz::shannon_entropy;

/// Instrumentation of one transcode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodecStats {
    pub quality: u8,
    /// Shannon entropy of the quantized-coefficient histogram, bits per coefficient.
    pub coefficient_entropy: f64,
    pub nonzero_fraction: f64,
    /// Infinite when the output equals the source.
    pub psnr_db: f64,
}

#[derive(Default)]
struct LevelHistogram {
    counts: BTreeMap<i32, u64>,
    total: u64,
    nonzero: u64,
}

impl LevelHistogram {
    fn record(&mut self, level: i32) {
        *self.counts.entry(level).or_default() += 1;
        self.total += 1;
        if level != 0 {
            self.nonzero += 1;
        }
    }
}

fn transcode_plane(plane: &Plane, table: &QuantTable, hist: &mut LevelHistogram) -> Plane {
    let (w, h) = (plane.width, plane.height);
    let (bw, bh) = (w.div_ceil(8), h.div_ceil(8));
    let mut out = vec![0u8; w * h];
    for by in 0..bh {
        for bx in 0..bw {
            let block: [f64; 64] = std::array::from_fn(|i| {
                let x = (bx * 8 + i % 8).min(w - 1);
                let y = (by * 8 + i / 8).min(h - 1);
                plane.get(x, y) as f64
            });
            let levels = quantize_block(&forward_dct(&block), table);
            levels.0.iter().for_each(|&l| hist.record(l));
            let recon = inverse_dct(&dequantize_block::<f64>(&levels, table));
            for (i, s) in recon.iter().enumerate() {
                let (x, y) = (bx * 8 + i % 8, by * 8 + i / 8);
                if x < w && y < h {
                    out[y * w + x] = *s;
                }
            }
        }
    }
    Plane { width: w, height: h, samples: out }
}

/// Peak signal-to-noise ratio of 8-bit data; infinite for identical inputs.
pub fn psnr(reference: &[u8], test: &[u8]) -> f64 {
    assert_eq!(reference.len(), test.len());
    let mse = reference
        .iter()
        .zip(test)
        .map(|(a, b)| {
            let d = *a as f64 - *b as f64;
            d * d
        })
        .sum::<f64>()
        / reference.len() as f64;
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0 * 255.0 / mse).log10()
    }
}

/// Full forward and inverse JPEG-style pipeline at quality `q`.
///
/// Luma uses the integer-scaled K.1 table, both chroma planes K.2. Edge blocks
/// are replicate-padded.
pub fn transcode_image(img: &ImageRgb, q: u8) -> Result<(ImageRgb, CodecStats)> {
    let luma = scale_quant_table(&QuantTable::luminance(), q, ScaleMode::Integer)?;
    let chroma = scale_quant_table(&QuantTable::chrominance(), q, ScaleMode::Integer)?;
    let yuv = rgb_to_yuv420(img)?;
    let mut hist = LevelHistogram::default();
    let degraded = ImageYuv420 {
        y: transcode_plane(&yuv.y, &luma, &mut hist),
        u: transcode_plane(&yuv.u, &chroma, &mut hist),
        v: transcode_plane(&yuv.v, &chroma, &mut hist),
    };
    let out = yuv420_to_rgb(&degraded)?;
    let counts: Vec<u64> = hist.counts.values().copied().collect();
    let stats = CodecStats {
        quality: q,
        coefficient_entropy: shannon_entropy(&counts)?,
        nonzero_fraction: hist.nonzero as f64 / hist.total as f64,
        psnr_db: psnr(img.pixels(), out.pixels()),
    };
    Ok((out, stats))
}
