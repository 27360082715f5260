use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dataset::LabeledImages;
use crate::error::Result;
use crate::image::{inverse_dct_unclamped, CoeffBlock, ImageRgb};

/// Natural-order index of the coefficient carrying the label, row 4 column 4.
pub const LABEL_COEFF: usize = 4 * 8 + 4;
/// Magnitude of the label coefficient in every block.
pub const LABEL_AMPLITUDE: f64 = 35.0;

/// Gray images whose class is the sign of one mid-frequency luma coefficient,
/// repeated in every 8×8 block, on top of random low-frequency content.
///
/// The label survives quantization exactly when the scaled divisor for that
/// coefficient is at most twice [`LABEL_AMPLITUDE`]; at coarser settings the
/// images carry no class information.
pub fn synthetic_knee_images(count: usize, side: usize, seed: u64) -> Result<LabeledImages> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks = side.div_ceil(8);
    let mut out = LabeledImages::default();
    for i in 0..count {
        let label = i % 2;
        let sign = if label == 0 { -1.0 } else { 1.0 };
        let mut px = vec![0u8; side * side * 3];
        for by in 0..blocks {
            for bx in 0..blocks {
                let mut c = [0.0f64; 64];
                c[0] = rng.random_range(-240.0..240.0);
                for idx in [1, 8, 9, 2, 16] {
                    c[idx] = rng.random_range(-60.0..60.0);
                }
                c[LABEL_COEFF] = sign * LABEL_AMPLITUDE;
                let block = inverse_dct_unclamped(&CoeffBlock(c));
                for (j, v) in block.iter().enumerate() {
                    let (x, y) = (bx * 8 + j % 8, by * 8 + j / 8);
                    if x < side && y < side {
                        let g = v.round().clamp(0.0, 255.0) as u8;
                        px[3 * (y * side + x)..3 * (y * side + x) + 3].fill(g);
                    }
                }
            }
        }
        out.images.push(ImageRgb::new(side, side, px)?);
        out.labels.push(label);
    }
    Ok(out)
}
