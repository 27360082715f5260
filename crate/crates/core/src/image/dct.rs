use crate::scalar::Scalar;

/// 64 DCT coefficients of one 8×8 block in natural (row-major) order.
///
/// Index `v * 8 + u` holds vertical frequency `v`, horizontal frequency `u`;
/// the DC term sits at index 0. See [`super::ZIGZAG`] for scan order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffBlock<T>(pub [T; 64]);

impl<T: Scalar> CoeffBlock<T> {
    pub fn zeros() -> Self {
        Self([T::zero(); 64])
    }

    pub fn dc(&self) -> T {
        self.0[0]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

/// `basis[u][x] = c(u)/2 · cos((2x+1)uπ/16)`, the orthonormal 8-point DCT-II.
fn basis<T: Scalar>() -> [[T; 8]; 8] {
    let mut m = [[T::zero(); 8]; 8];
    let half = T::lit(0.5);
    for (u, row) in m.iter_mut().enumerate() {
        let cu = if u == 0 { T::FRAC_1_SQRT_2() } else { T::one() };
        for (x, cell) in row.iter_mut().enumerate() {
            let angle = T::lit(((2 * x + 1) * u) as f64) * T::PI() / T::lit(16.0);
            *cell = half * cu * angle.cos();
        }
    }
    m
}

/// Separable transform `out = A · X · Aᵀ` (forward) or `Aᵀ · X · A` (inverse).
fn separable<T: Scalar>(input: &[T; 64], inverse: bool) -> [T; 64] {
    let b = basis::<T>();
    let coef = |i: usize, j: usize| if inverse { b[j][i] } else { b[i][j] };
    let mut tmp = [T::zero(); 64];
    for r in 0..8 {
        for c in 0..8 {
            let mut acc = T::zero();
            for k in 0..8 {
                acc += coef(r, k) * input[k * 8 + c];
            }
            tmp[r * 8 + c] = acc;
        }
    }
    let mut out = [T::zero(); 64];
    for r in 0..8 {
        for c in 0..8 {
            let mut acc = T::zero();
            for k in 0..8 {
                acc += tmp[r * 8 + k] * coef(c, k);
            }
            out[r * 8 + c] = acc;
        }
    }
    out
}

/// Orthonormal 2-D DCT-II of samples that are already centered on zero.
pub fn forward_dct_shifted<T: Scalar>(centered: &[T; 64]) -> CoeffBlock<T> {
    CoeffBlock(separable(centered, false))
}

/// Forward DCT of 64 samples in `[0, 255]`; the −128 level shift is applied here.
pub fn forward_dct<T: Scalar>(samples: &[T; 64]) -> CoeffBlock<T> {
    let shift = T::lit(128.0);
    let mut centered = *samples;
    centered.iter_mut().for_each(|s| *s -= shift);
    forward_dct_shifted(&centered)
}

/// Exact inverse of [`forward_dct`], including the +128 level shift, without rounding.
pub fn inverse_dct_unclamped<T: Scalar>(coeffs: &CoeffBlock<T>) -> [T; 64] {
    let shift = T::lit(128.0);
    let mut out = separable(&coeffs.0, true);
    out.iter_mut().for_each(|s| *s += shift);
    out
}

/// Inverse DCT rounded and clamped to 8-bit samples.
pub fn inverse_dct<T: Scalar>(coeffs: &CoeffBlock<T>) -> [u8; 64] {
    let raw = inverse_dct_unclamped(coeffs);
    let mut out = [0u8; 64];
    for (o, s) in out.iter_mut().zip(raw) {
        *o = s.as_f64().round().clamp(0.0, 255.0) as u8;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct double sum from the JPEG FDCT definition.
    fn oracle_fdct(x: &[f64; 64]) -> [f64; 64] {
        let c = |k: usize| if k == 0 { 1.0 / 2f64.sqrt() } else { 1.0 };
        let mut out = [0.0; 64];
        for v in 0..8 {
            for u in 0..8 {
                let mut s = 0.0;
                for y in 0..8 {
                    for xx in 0..8 {
                        s += (x[y * 8 + xx] - 128.0)
                            * (((2 * xx + 1) * u) as f64 * std::f64::consts::PI / 16.0).cos()
                            * (((2 * y + 1) * v) as f64 * std::f64::consts::PI / 16.0).cos();
                    }
                }
                out[v * 8 + u] = 0.25 * c(u) * c(v) * s;
            }
        }
        out
    }

    #[test]
    fn mid_gray_block_has_no_energy() {
        let out = forward_dct(&[128.0f64; 64]);
        assert!(out.0.iter().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn white_block_dc_is_1016() {
        let out = forward_dct(&[255.0f64; 64]);
        assert!((out.dc() - 1016.0).abs() < 1e-9);
        assert!(out.0[1..].iter().all(|c| c.abs() < 1e-9));
    }

    #[test]
    fn inverse_of_dc_only_blocks() {
        assert_eq!(inverse_dct(&CoeffBlock::<f64>::zeros()), [128u8; 64]);
        let mut c = CoeffBlock::<f64>::zeros();
        c.0[0] = 1016.0;
        assert_eq!(inverse_dct(&c), [255u8; 64]);
    }

    #[test]
    fn matches_definition_oracle() {
        let mut x = [0.0f64; 64];
        for (i, s) in x.iter_mut().enumerate() {
            *s = ((i * 37 + 11) % 256) as f64;
        }
        let got = forward_dct(&x);
        let want = oracle_fdct(&x);
        for (g, w) in got.0.iter().zip(want) {
            assert!((g - w).abs() < 1e-9, "{g} vs {w}");
        }
    }

    #[test]
    fn single_precision_round_trip() {
        let x: [f32; 64] = std::array::from_fn(|i| (i * 4) as f32);
        let back = inverse_dct_unclamped(&forward_dct(&x));
        for (a, b) in x.iter().zip(back) {
            assert!((a - b).abs() < 1e-3);
        }
    }
}
