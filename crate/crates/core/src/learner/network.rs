use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::spec::{LayerSpec, ModelSpec, Shape};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::scalar::{matmul, Scalar, Trans};

const BN_EPS: f64 = 1e-5;
const BN_MOMENTUM: f64 = 0.1;

/// Whether dropout samples masks and batch-norm uses batch statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    /// Dropout off, batch-norm on frozen running statistics.
    Eval,
}

#[derive(Debug, Clone)]
pub(crate) struct Layer<T> {
    pub(crate) spec: LayerSpec,
    pub(crate) input: Shape,
    pub(crate) output: Shape,
    /// Conv: `[out, in·k·k]` weights then `out` biases. Dense: `[units, inputs]`
    /// then `units`. BatchNorm: `channels` scales then `channels` shifts.
    pub(crate) params: Vec<T>,
    pub(crate) running_mean: Vec<T>,
    pub(crate) running_var: Vec<T>,
}

/// Values saved by the forward pass for backpropagation.
#[derive(Debug, Clone)]
pub enum Cache<T> {
    None,
    Conv { cols: Vec<T> },
    Dense { input: Vec<T> },
    MaxPool { argmax: Vec<usize> },
    BatchNorm { xhat: Vec<T>, inv_std: Vec<T>, frozen: bool },
    Dropout { mask: Option<Vec<T>> },
    Relu { active: Vec<bool> },
    Elu { output: Vec<T> },
    Softmax { probs: Vec<T> },
}

/// Per-layer parameter gradients, laid out like the parameters.
pub type Gradients<T> = Vec<Vec<T>>;

/// A feed-forward network built from a [`ModelSpec`].
#[derive(Debug, Clone)]
pub struct Network<T> {
    spec: ModelSpec,
    pub(crate) layers: Vec<Layer<T>>,
}

fn map_dims(s: Shape) -> (usize, usize, usize) {
    match s {
        Shape::Map { channels, height, width } => (channels, height, width),
        Shape::Flat(n) => (n, 1, 1),
    }
}

/// Unfolds one `[c, h, w]` image into `[c·k·k, h·w]` patches with zero padding.
fn im2col<T: Scalar>(x: &[T], c: usize, h: usize, w: usize, k: usize, cols: &mut [T]) {
    let pad = (k / 2) as isize;
    let hw = h * w;
    for ch in 0..c {
        for ky in 0..k {
            for kx in 0..k {
                let row = ((ch * k + ky) * k + kx) * hw;
                for y in 0..h {
                    let sy = y as isize + ky as isize - pad;
                    for xx in 0..w {
                        let sx = xx as isize + kx as isize - pad;
                        cols[row + y * w + xx] = if sy >= 0 && sy < h as isize && sx >= 0 && sx < w as isize {
                            x[(ch * h + sy as usize) * w + sx as usize]
                        } else {
                            T::zero()
                        };
                    }
                }
            }
        }
    }
}

/// Adjoint of [`im2col`]: accumulates patch gradients back into the image.
fn col2im<T: Scalar>(cols: &[T], c: usize, h: usize, w: usize, k: usize, dx: &mut [T]) {
    let pad = (k / 2) as isize;
    let hw = h * w;
    for ch in 0..c {
        for ky in 0..k {
            for kx in 0..k {
                let row = ((ch * k + ky) * k + kx) * hw;
                for y in 0..h {
                    let sy = y as isize + ky as isize - pad;
                    if sy < 0 || sy >= h as isize {
                        continue;
                    }
                    for xx in 0..w {
                        let sx = xx as isize + kx as isize - pad;
                        if sx >= 0 && sx < w as isize {
                            dx[(ch * h + sy as usize) * w + sx as usize] += cols[row + y * w + xx];
                        }
                    }
                }
            }
        }
    }
}

fn uniform_fill<T: Scalar>(rng: &mut ChaCha8Rng, n: usize, limit: f64) -> impl Iterator<Item = T> + '_ {
    (0..n).map(move |_| T::lit(rng.random_range(-limit..limit)))
}

impl<T: Scalar> Network<T> {
    /// Builds the network with fan-in-scaled uniform weights, zero biases.
    pub fn new(spec: &ModelSpec, seed: u64) -> Result<Self> {
        let shapes = spec.shapes()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut prev = spec.input_shape();
        let mut layers = Vec::with_capacity(spec.layers.len());
        for (&ls, &out) in spec.layers.iter().zip(&shapes) {
            let mut params = Vec::new();
            let (mut running_mean, mut running_var) = (Vec::new(), Vec::new());
            match ls {
                LayerSpec::Conv { filters, kernel } => {
                    let (c, _, _) = map_dims(prev);
                    let fan_in = c * kernel * kernel;
                    let limit = (6.0 / fan_in as f64).sqrt();
                    params.extend(uniform_fill::<T>(&mut rng, filters * fan_in, limit));
                    params.extend(std::iter::repeat_n(T::zero(), filters));
                }
                LayerSpec::Dense { units } => {
                    let inputs = prev.size();
                    let limit = (6.0 / inputs as f64).sqrt();
                    params.extend(uniform_fill::<T>(&mut rng, units * inputs, limit));
                    params.extend(std::iter::repeat_n(T::zero(), units));
                }
                LayerSpec::BatchNorm => {
                    let (c, _, _) = map_dims(prev);
                    params.extend(std::iter::repeat_n(T::one(), c));
                    params.extend(std::iter::repeat_n(T::zero(), c));
                    running_mean = vec![T::zero(); c];
                    running_var = vec![T::one(); c];
                }
                _ => {}
            }
            layers.push(Layer { spec: ls, input: prev, output: out, params, running_mean, running_var });
            prev = out;
        }
        Ok(Self { spec: spec.clone(), layers })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layer_spec(&self, i: usize) -> LayerSpec {
        self.layers[i].spec
    }

    pub fn params(&self, layer: usize) -> &[T] {
        &self.layers[layer].params
    }

    pub fn params_mut(&mut self, layer: usize) -> &mut [T] {
        &mut self.layers[layer].params
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.params.len()).sum()
    }

    /// Batch-norm running statistics of one layer (empty for other layers).
    pub fn running_stats(&self, layer: usize) -> (&[T], &[T]) {
        (&self.layers[layer].running_mean, &self.layers[layer].running_var)
    }

    pub fn running_stats_mut(&mut self, layer: usize) -> (&mut Vec<T>, &mut Vec<T>) {
        let l = &mut self.layers[layer];
        (&mut l.running_mean, &mut l.running_var)
    }

    fn check_input(&self, x: &Tensor<T>) -> Result<()> {
        let want = self.spec.input_shape().size();
        if x.shape().len() < 2 || x.item_len() != want || x.batch() == 0 {
            return Err(Error::ShapeMismatch(format!(
                "{}: input {:?} does not match [N, {}, {}, {}]",
                self.spec.name,
                x.shape(),
                self.spec.input[0],
                self.spec.input[1],
                self.spec.input[2]
            )));
        }
        Ok(())
    }

    /// Class probabilities in inference mode (dropout off, running statistics).
    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        Ok(self.forward_pass(x, Mode::Eval, None)?.0)
    }

    /// Forward pass that keeps caches. In [`Mode::Train`] the batch-norm
    /// running statistics are updated and `rng` drives the dropout masks.
    pub fn forward_cached(
        &mut self,
        x: &Tensor<T>,
        mode: Mode,
        rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(Tensor<T>, Vec<Cache<T>>)> {
        let (out, caches, stats) = self.forward_pass(x, mode, rng)?;
        let momentum = T::lit(BN_MOMENTUM);
        for (layer, stat) in self.layers.iter_mut().zip(stats) {
            if let Some((mean, var)) = stat {
                for (r, m) in layer.running_mean.iter_mut().zip(mean) {
                    *r = (T::one() - momentum) * *r + momentum * m;
                }
                for (r, v) in layer.running_var.iter_mut().zip(var) {
                    *r = (T::one() - momentum) * *r + momentum * v;
                }
            }
        }
        Ok((out, caches))
    }

    #[allow(clippy::type_complexity)]
    pub(crate) fn forward_pass(
        &self,
        x: &Tensor<T>,
        mode: Mode,
        mut rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(Tensor<T>, Vec<Cache<T>>, Vec<Option<(Vec<T>, Vec<T>)>>)> {
        self.check_input(x)?;
        let n = x.batch();
        let mut cur = x.data().to_vec();
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut stats = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let mut stat = None;
            let (next, cache) = match layer.spec {
                LayerSpec::Conv { filters, kernel } => {
                    let (c, h, w) = map_dims(layer.input);
                    let (hw, ckk) = (h * w, c * kernel * kernel);
                    let (weights, bias) = layer.params.split_at(filters * ckk);
                    let mut cols = vec![T::zero(); n * ckk * hw];
                    let mut out = vec![T::zero(); n * filters * hw];
                    for i in 0..n {
                        let col = &mut cols[i * ckk * hw..(i + 1) * ckk * hw];
                        im2col(&cur[i * c * hw..(i + 1) * c * hw], c, h, w, kernel, col);
                        let o = &mut out[i * filters * hw..(i + 1) * filters * hw];
                        for (f, row) in o.chunks_exact_mut(hw).enumerate() {
                            row.iter_mut().for_each(|v| *v = bias[f]);
                        }
                        matmul(filters, ckk, hw, weights, Trans::No, col, Trans::No, o, true);
                    }
                    (out, Cache::Conv { cols })
                }
                LayerSpec::Dense { units } => {
                    let inputs = layer.input.size();
                    let (weights, bias) = layer.params.split_at(units * inputs);
                    let mut out: Vec<T> = (0..n).flat_map(|_| bias.iter().copied()).collect();
                    matmul(n, inputs, units, &cur, Trans::No, weights, Trans::Yes, &mut out, true);
                    (out, Cache::Dense { input: cur })
                }
                LayerSpec::MaxPool => {
                    let (c, h, w) = map_dims(layer.input);
                    let (oh, ow) = (h.div_ceil(2), w.div_ceil(2));
                    let mut out = Vec::with_capacity(n * c * oh * ow);
                    let mut argmax = Vec::with_capacity(n * c * oh * ow);
                    for plane in 0..n * c {
                        let base = plane * h * w;
                        for oy in 0..oh {
                            for ox in 0..ow {
                                let mut best = (base + 2 * oy * w + 2 * ox, T::neg_infinity());
                                for y in 2 * oy..(2 * oy + 2).min(h) {
                                    for xx in 2 * ox..(2 * ox + 2).min(w) {
                                        let idx = base + y * w + xx;
                                        if cur[idx] > best.1 {
                                            best = (idx, cur[idx]);
                                        }
                                    }
                                }
                                argmax.push(best.0);
                                out.push(best.1);
                            }
                        }
                    }
                    (out, Cache::MaxPool { argmax })
                }
                LayerSpec::GlobalAvgPool => {
                    let (c, h, w) = map_dims(layer.input);
                    let inv = T::one() / T::of_usize(h * w);
                    let out = cur.chunks_exact(h * w).map(|p| p.iter().copied().sum::<T>() * inv).collect();
                    debug_assert_eq!(cur.len(), n * c * h * w);
                    (out, Cache::None)
                }
                LayerSpec::BatchNorm => {
                    let (c, h, w) = map_dims(layer.input);
                    let spatial = h * w;
                    let (gamma, beta) = layer.params.split_at(c);
                    let eps = T::lit(BN_EPS);
                    let (mean, var) = if mode == Mode::Train {
                        let count = T::of_usize(n * spatial);
                        let mut mean = vec![T::zero(); c];
                        let mut var = vec![T::zero(); c];
                        for i in 0..n {
                            for ch in 0..c {
                                let s = &cur[(i * c + ch) * spatial..(i * c + ch + 1) * spatial];
                                mean[ch] += s.iter().copied().sum::<T>();
                            }
                        }
                        mean.iter_mut().for_each(|m| *m /= count);
                        for i in 0..n {
                            for ch in 0..c {
                                let s = &cur[(i * c + ch) * spatial..(i * c + ch + 1) * spatial];
                                var[ch] += s.iter().map(|&v| (v - mean[ch]) * (v - mean[ch])).sum::<T>();
                            }
                        }
                        var.iter_mut().for_each(|v| *v /= count);
                        stat = Some((mean.clone(), var.clone()));
                        (mean, var)
                    } else {
                        (layer.running_mean.clone(), layer.running_var.clone())
                    };
                    let inv_std: Vec<T> = var.iter().map(|&v| T::one() / (v + eps).sqrt()).collect();
                    let mut xhat = vec![T::zero(); cur.len()];
                    let mut out = vec![T::zero(); cur.len()];
                    for i in 0..n {
                        for ch in 0..c {
                            let start = (i * c + ch) * spatial;
                            for j in start..start + spatial {
                                xhat[j] = (cur[j] - mean[ch]) * inv_std[ch];
                                out[j] = gamma[ch] * xhat[j] + beta[ch];
                            }
                        }
                    }
                    (out, Cache::BatchNorm { xhat, inv_std, frozen: mode == Mode::Eval })
                }
                LayerSpec::Dropout { rate } => match (mode, rng.as_deref_mut()) {
                    (Mode::Train, Some(r)) if rate > 0.0 => {
                        let keep = T::one() / T::lit(1.0 - rate);
                        let mask: Vec<T> =
                            (0..cur.len()).map(|_| if r.random::<f64>() < rate { T::zero() } else { keep }).collect();
                        let out = cur.iter().zip(&mask).map(|(a, m)| *a * *m).collect();
                        (out, Cache::Dropout { mask: Some(mask) })
                    }
                    _ => (cur, Cache::Dropout { mask: None }),
                },
                LayerSpec::Relu => {
                    let active: Vec<bool> = cur.iter().map(|&v| v > T::zero()).collect();
                    let out = cur.iter().map(|&v| if v > T::zero() { v } else { T::zero() }).collect();
                    (out, Cache::Relu { active })
                }
                LayerSpec::Elu => {
                    let out: Vec<T> =
                        cur.iter().map(|&v| if v > T::zero() { v } else { v.exp_m1() }).collect();
                    (out.clone(), Cache::Elu { output: out })
                }
                LayerSpec::Flatten => (cur, Cache::None),
                LayerSpec::Softmax => {
                    let k = layer.input.size();
                    let mut probs = cur;
                    for row in probs.chunks_exact_mut(k) {
                        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
                        let mut sum = T::zero();
                        for v in row.iter_mut() {
                            *v = (*v - max).exp();
                            sum += *v;
                        }
                        row.iter_mut().for_each(|v| *v /= sum);
                    }
                    (probs.clone(), Cache::Softmax { probs })
                }
            };
            cur = next;
            caches.push(cache);
            stats.push(stat);
        }
        let out_shape = match self.layers.last().map(|l| l.output).unwrap_or(self.spec.input_shape()) {
            Shape::Flat(k) => vec![n, k],
            Shape::Map { channels, height, width } => vec![n, channels, height, width],
        };
        Ok((Tensor::new(out_shape, cur)?, caches, stats))
    }

    /// Backpropagates `grad` (gradient of the loss with respect to the output
    /// of layer `from - 1`) down to the input. Returns parameter gradients.
    pub fn backward_from(&self, caches: &[Cache<T>], from: usize, grad: Vec<T>, batch: usize) -> Gradients<T> {
        let mut grads: Gradients<T> = self.layers.iter().map(|l| vec![T::zero(); l.params.len()]).collect();
        let mut g = grad;
        let n = batch;
        for idx in (0..from).rev() {
            let layer = &self.layers[idx];
            let need_input_grad = idx > 0;
            g = match (&layer.spec, &caches[idx]) {
                (LayerSpec::Conv { filters, kernel }, Cache::Conv { cols }) => {
                    let (c, h, w) = map_dims(layer.input);
                    let (hw, ckk) = (h * w, c * kernel * kernel);
                    let weights = &layer.params[..filters * ckk];
                    let (gw, gb) = grads[idx].split_at_mut(filters * ckk);
                    let mut dx = if need_input_grad { vec![T::zero(); n * c * hw] } else { Vec::new() };
                    let mut dcols = vec![T::zero(); ckk * hw];
                    for i in 0..n {
                        let dy = &g[i * filters * hw..(i + 1) * filters * hw];
                        let col = &cols[i * ckk * hw..(i + 1) * ckk * hw];
                        matmul(*filters, hw, ckk, dy, Trans::No, col, Trans::Yes, gw, true);
                        for (f, row) in dy.chunks_exact(hw).enumerate() {
                            gb[f] += row.iter().copied().sum::<T>();
                        }
                        if need_input_grad {
                            matmul(ckk, *filters, hw, weights, Trans::Yes, dy, Trans::No, &mut dcols, false);
                            col2im(&dcols, c, h, w, *kernel, &mut dx[i * c * hw..(i + 1) * c * hw]);
                        }
                    }
                    dx
                }
                (LayerSpec::Dense { units }, Cache::Dense { input }) => {
                    let inputs = layer.input.size();
                    let weights = &layer.params[..units * inputs];
                    let (gw, gb) = grads[idx].split_at_mut(units * inputs);
                    matmul(*units, n, inputs, &g, Trans::Yes, input, Trans::No, gw, true);
                    for row in g.chunks_exact(*units) {
                        for (b, v) in gb.iter_mut().zip(row) {
                            *b += *v;
                        }
                    }
                    if need_input_grad {
                        let mut dx = vec![T::zero(); n * inputs];
                        matmul(n, *units, inputs, &g, Trans::No, weights, Trans::No, &mut dx, false);
                        dx
                    } else {
                        Vec::new()
                    }
                }
                (LayerSpec::MaxPool, Cache::MaxPool { argmax }) => {
                    let mut dx = vec![T::zero(); n * layer.input.size()];
                    for (&i, &v) in argmax.iter().zip(&g) {
                        dx[i] += v;
                    }
                    dx
                }
                (LayerSpec::GlobalAvgPool, _) => {
                    let (_, h, w) = map_dims(layer.input);
                    let inv = T::one() / T::of_usize(h * w);
                    g.iter().flat_map(|&v| std::iter::repeat_n(v * inv, h * w)).collect()
                }
                (LayerSpec::BatchNorm, Cache::BatchNorm { xhat, inv_std, frozen }) => {
                    let (c, h, w) = map_dims(layer.input);
                    let spatial = h * w;
                    let gamma = &layer.params[..c];
                    let (ggamma, gbeta) = grads[idx].split_at_mut(c);
                    let mut sum_dy = vec![T::zero(); c];
                    let mut sum_dy_xhat = vec![T::zero(); c];
                    for i in 0..n {
                        for ch in 0..c {
                            let start = (i * c + ch) * spatial;
                            for j in start..start + spatial {
                                sum_dy[ch] += g[j];
                                sum_dy_xhat[ch] += g[j] * xhat[j];
                            }
                        }
                    }
                    for ch in 0..c {
                        ggamma[ch] += sum_dy_xhat[ch];
                        gbeta[ch] += sum_dy[ch];
                    }
                    let count = T::of_usize(n * spatial);
                    let mut dx = vec![T::zero(); g.len()];
                    for i in 0..n {
                        for ch in 0..c {
                            let start = (i * c + ch) * spatial;
                            let scale = gamma[ch] * inv_std[ch];
                            for j in start..start + spatial {
                                dx[j] = if *frozen {
                                    scale * g[j]
                                } else {
                                    scale / count
                                        * (count * g[j] - sum_dy[ch] - xhat[j] * sum_dy_xhat[ch])
                                };
                            }
                        }
                    }
                    dx
                }
                (LayerSpec::Dropout { .. }, Cache::Dropout { mask }) => match mask {
                    Some(m) => g.iter().zip(m).map(|(a, b)| *a * *b).collect(),
                    None => g,
                },
                (LayerSpec::Relu, Cache::Relu { active }) => {
                    g.iter().zip(active).map(|(&v, &a)| if a { v } else { T::zero() }).collect()
                }
                (LayerSpec::Elu, Cache::Elu { output }) => g
                    .iter()
                    .zip(output)
                    .map(|(&v, &o)| if o > T::zero() { v } else { v * (o + T::one()) })
                    .collect(),
                (LayerSpec::Flatten, _) => g,
                (LayerSpec::Softmax, Cache::Softmax { probs }) => {
                    let k = layer.input.size();
                    let mut dx = vec![T::zero(); g.len()];
                    for ((d, gy), p) in dx.chunks_exact_mut(k).zip(g.chunks_exact(k)).zip(probs.chunks_exact(k)) {
                        let dot: T = gy.iter().zip(p).map(|(a, b)| *a * *b).sum();
                        for ((o, a), b) in d.iter_mut().zip(gy).zip(p) {
                            *o = *b * (*a - dot);
                        }
                    }
                    dx
                }
                (spec, _) => unreachable!("cache does not match layer {spec:?}"),
            };
        }
        grads
    }

    /// Sign pattern of every ReLU and the winner of every max-pool window.
    ///
    /// Two parameter settings with the same pattern lie in the same smooth
    /// piece of the loss surface.
    pub fn kink_pattern(caches: &[Cache<T>]) -> Vec<u64> {
        let mut out = Vec::new();
        for c in caches {
            match c {
                Cache::Relu { active } => {
                    for chunk in active.chunks(64) {
                        out.push(chunk.iter().enumerate().fold(0u64, |acc, (i, &a)| acc | ((a as u64) << i)));
                    }
                }
                Cache::MaxPool { argmax } => out.extend(argmax.iter().map(|&i| i as u64)),
                _ => {}
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::spec::LayerSpec::*;

    fn small() -> ModelSpec {
        ModelSpec::new(
            "small",
            [2, 5, 4],
            vec![
                Conv { filters: 3, kernel: 3 },
                BatchNorm,
                Relu,
                MaxPool,
                Conv { filters: 2, kernel: 1 },
                Elu,
                Flatten,
                Dropout { rate: 0.3 },
                Dense { units: 4 },
                Softmax,
            ],
        )
    }

    fn input(n: usize) -> Tensor<f64> {
        let len = n * 40;
        Tensor::new(vec![n, 2, 5, 4], (0..len).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect()).unwrap()
    }

    #[test]
    fn probabilities_sum_to_one() {
        let net = Network::<f64>::new(&small(), 1).unwrap();
        let p = net.forward(&input(3)).unwrap();
        assert_eq!(p.shape(), &[3, 4]);
        for row in p.data().chunks(4) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_head_gives_uniform_output() {
        let mut net = Network::<f64>::new(&small(), 1).unwrap();
        net.params_mut(8).iter_mut().for_each(|v| *v = 0.0);
        let p = net.forward(&input(2)).unwrap();
        assert!(p.data().iter().all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn deterministic_per_seed() {
        let a = Network::<f32>::new(&small(), 9).unwrap();
        let b = Network::<f32>::new(&small(), 9).unwrap();
        let x = input(2).cast::<f32>();
        assert_eq!(a.forward(&x).unwrap(), b.forward(&x).unwrap());
        let c = Network::<f32>::new(&small(), 10).unwrap();
        assert_ne!(a.params(0), c.params(0));
    }

    #[test]
    fn wrong_input_shape() {
        let net = Network::<f64>::new(&small(), 1).unwrap();
        let bad = Tensor::<f64>::zeros(vec![1, 3, 5, 4]);
        assert!(matches!(net.forward(&bad), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn im2col_col2im_are_adjoint() {
        // <im2col(x), y> == <x, col2im(y)>
        let (c, h, w, k) = (2, 3, 4, 3);
        let x: Vec<f64> = (0..c * h * w).map(|i| (i as f64).sin()).collect();
        let y: Vec<f64> = (0..c * k * k * h * w).map(|i| (i as f64 * 0.3).cos()).collect();
        let mut cols = vec![0.0; y.len()];
        im2col(&x, c, h, w, k, &mut cols);
        let mut back = vec![0.0; x.len()];
        col2im(&y, c, h, w, k, &mut back);
        let lhs: f64 = cols.iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(&back).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn training_mode_updates_running_stats() {
        let mut net = Network::<f64>::new(&small(), 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        net.forward_cached(&input(4), Mode::Train, Some(&mut rng)).unwrap();
        let (mean, var) = net.running_stats(1);
        assert!(mean.iter().any(|&m| m != 0.0));
        assert!(var.iter().any(|&v| v != 1.0));
    }
}
