use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Maximum shift of the random crop, in pixels.
pub const SHIFT: i32 = 4;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentFlags {
    pub shift: bool,
    pub flip: bool,
}

impl AugmentFlags {
    pub const NONE: Self = Self { shift: false, flip: false };
    pub const ALL: Self = Self { shift: true, flip: true };

    pub fn any(self) -> bool {
        self.shift || self.flip
    }
}

fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    let m = i.rem_euclid(period);
    (if m < n { m } else { period - m }) as usize
}

/// Random shift (reflect-padded by 4, cropped back to size) and horizontal
/// flip with probability 0.5, per example.
pub fn augment<T: Scalar>(batch: &Tensor<T>, flags: AugmentFlags, seed: u64) -> Result<Tensor<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    augment_with(batch, flags, &mut rng)
}

pub fn augment_with<T: Scalar>(batch: &Tensor<T>, flags: AugmentFlags, rng: &mut ChaCha8Rng) -> Result<Tensor<T>> {
    let &[n, c, h, w] = batch.shape() else {
        return Err(Error::ShapeMismatch(format!("augment needs [N, C, H, W], got {:?}", batch.shape())));
    };
    if !flags.any() {
        return Ok(batch.clone());
    }
    let src = batch.data();
    let mut out = vec![T::zero(); src.len()];
    for i in 0..n {
        let (dy, dx) = if flags.shift {
            (rng.random_range(-SHIFT..=SHIFT), rng.random_range(-SHIFT..=SHIFT))
        } else {
            (0, 0)
        };
        let flip = flags.flip && rng.random_bool(0.5);
        for ch in 0..c {
            let plane = (i * c + ch) * h * w;
            for y in 0..h {
                let sy = reflect(y as isize + dy as isize, h);
                for x in 0..w {
                    let xx = if flip { w - 1 - x } else { x };
                    let sx = reflect(xx as isize + dx as isize, w);
                    out[plane + y * w + x] = src[plane + sy * w + sx];
                }
            }
        }
    }
    Tensor::new(batch.shape().to_vec(), out)
}
