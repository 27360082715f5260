use crate::scalar::Scalar;

/// Window length (samples per frame); frames advance by half of it.
pub const DEFAULT_MDCT_WINDOW: usize = 1024;

/// Sine-windowed MDCT with 50% overlap, scaled to be orthonormal so that
/// overlap-add of the inverse cancels time-domain aliasing exactly.
#[derive(Debug, Clone)]
pub struct Mdct<T> {
    half: usize,
    window: Vec<T>,
    /// `half × 2·half` cosine kernel, row per coefficient.
    kernel: Vec<T>,
}

/// Coefficient frames of one signal plus the length needed to trim padding.
#[derive(Debug, Clone, PartialEq)]
pub struct MdctFrames<T> {
    pub coeffs: Vec<Vec<T>>,
    pub signal_len: usize,
}

impl<T: Scalar> Mdct<T> {
    /// `window` must be even and at least 2.
    pub fn new(window: usize) -> Self {
        assert!(window >= 2 && window.is_multiple_of(2), "MDCT window must be even");
        let half = window / 2;
        let n = T::of_usize(window);
        let m = T::of_usize(half);
        let half_t = T::lit(0.5);
        let win = (0..window)
            .map(|i| (T::PI() * (T::of_usize(i) + half_t) / n).sin())
            .collect();
        let scale = (T::lit(2.0) / m).sqrt();
        let mut kernel = Vec::with_capacity(half * window);
        for k in 0..half {
            for i in 0..window {
                let phase = T::lit(2.0) * T::PI() / n
                    * (T::of_usize(i) + half_t + m * half_t)
                    * (T::of_usize(k) + half_t);
                kernel.push(scale * phase.cos());
            }
        }
        Self { half, window: win, kernel }
    }

    pub fn window_len(&self) -> usize {
        2 * self.half
    }

    pub fn bins(&self) -> usize {
        self.half
    }

    /// Pads `half` zeros in front and zeros behind up to a whole frame, then
    /// transforms every hop.
    pub fn forward(&self, signal: &[T]) -> MdctFrames<T> {
        let m = self.half;
        let blocks = signal.len().div_ceil(m) + 2;
        let mut padded = vec![T::zero(); blocks * m];
        padded[m..m + signal.len()].copy_from_slice(signal);
        let mut windowed = vec![T::zero(); 2 * m];
        let coeffs = (0..blocks - 1)
            .map(|f| {
                let frame = &padded[f * m..f * m + 2 * m];
                for ((w, x), win) in windowed.iter_mut().zip(frame).zip(&self.window) {
                    *w = *x * *win;
                }
                self.kernel
                    .chunks_exact(2 * m)
                    .map(|row| row.iter().zip(&windowed).map(|(a, b)| *a * *b).sum())
                    .collect()
            })
            .collect();
        MdctFrames { coeffs, signal_len: signal.len() }
    }

    /// Windowed overlap-add inverse, trimmed back to the original length.
    pub fn inverse(&self, frames: &MdctFrames<T>) -> Vec<T> {
        let m = self.half;
        let mut out = vec![T::zero(); (frames.coeffs.len() + 1) * m];
        let mut frame = vec![T::zero(); 2 * m];
        for (f, coeffs) in frames.coeffs.iter().enumerate() {
            assert_eq!(coeffs.len(), m, "frame {f} has the wrong bin count");
            frame.iter_mut().for_each(|v| *v = T::zero());
            for (c, row) in coeffs.iter().zip(self.kernel.chunks_exact(2 * m)) {
                if c.is_zero() {
                    continue;
                }
                for (v, k) in frame.iter_mut().zip(row) {
                    *v += *c * *k;
                }
            }
            for (i, (v, w)) in frame.iter().zip(&self.window).enumerate() {
                out[f * m + i] += *v * *w;
            }
        }
        out[m..m + frames.signal_len].to_vec()
    }
}
