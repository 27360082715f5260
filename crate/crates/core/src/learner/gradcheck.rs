use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::network::{Mode, Network};
use super::spec::LayerSpec;
use super::tensor::Tensor;
use super::train::cross_entropy;
use crate::error::{Error, Result};

/// Objective differentiated by the checker.
#[derive(Debug, Clone)]
pub enum Objective {
    /// Mean cross-entropy against class labels; the network must end in softmax.
    CrossEntropy(Vec<usize>),
    /// Half the mean squared distance to these targets, per example.
    SquaredError(Tensor<f64>),
}

#[derive(Debug, Clone)]
pub struct GradCheckConfig {
    /// Weights compared, spread across parameterised layers. Capped at 2000.
    pub samples: usize,
    pub step: f64,
    /// Denominator floor for the relative error.
    pub floor: f64,
    pub seed: u64,
    /// Negates the analytic gradient of one layer (fault injection).
    pub flip_sign_layer: Option<usize>,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self { samples: 2000, step: 1e-5, floor: 1e-6, seed: 0, flip_sign_layer: None }
    }
}

pub const MAX_SAMPLES: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    /// `(layer, index)` of the worst weight.
    pub worst: Option<(usize, usize)>,
    pub checked: usize,
    /// Candidates rejected because a perturbation crossed a ReLU or max-pool kink.
    pub skipped_kinks: usize,
}

fn objective_loss(net: &Network<f64>, x: &Tensor<f64>, obj: &Objective) -> Result<(f64, Vec<u64>)> {
    let (out, caches, _) = net.forward_pass(x, Mode::Eval, None)?;
    let kinks = Network::kink_pattern(&caches);
    let loss = match obj {
        Objective::CrossEntropy(labels) => cross_entropy(&out, labels)?.0,
        Objective::SquaredError(t) => squared_error(&out, t)?.0,
    };
    Ok((loss, kinks))
}

fn squared_error(out: &Tensor<f64>, target: &Tensor<f64>) -> Result<(f64, Vec<f64>)> {
    if out.len() != target.len() {
        return Err(Error::ShapeMismatch(format!("output {:?} vs target {:?}", out.shape(), target.shape())));
    }
    let n = out.batch() as f64;
    let diff: Vec<f64> = out.data().iter().zip(target.data()).map(|(o, t)| o - t).collect();
    let loss = 0.5 * diff.iter().map(|d| d * d).sum::<f64>() / n;
    Ok((loss, diff.into_iter().map(|d| d / n).collect()))
}

/// Analytic gradients in inference mode (dropout off, frozen batch-norm).
pub fn analytic_gradients(net: &Network<f64>, x: &Tensor<f64>, obj: &Objective) -> Result<Vec<Vec<f64>>> {
    let (out, caches, _) = net.forward_pass(x, Mode::Eval, None)?;
    let n = x.batch();
    Ok(match obj {
        Objective::CrossEntropy(labels) => {
            if net.spec().layers.last() != Some(&LayerSpec::Softmax) {
                return Err(Error::InvalidInput("cross-entropy needs a softmax output".into()));
            }
            let (_, g) = cross_entropy(&out, labels)?;
            net.backward_from(&caches, net.num_layers() - 1, g, n)
        }
        Objective::SquaredError(t) => {
            let (_, g) = squared_error(&out, t)?;
            net.backward_from(&caches, net.num_layers(), g, n)
        }
    })
}

/// Largest relative error between analytic and central-difference gradients
/// over randomly sampled weights.
///
/// A candidate is replaced when either perturbation changes the ReLU sign
/// pattern or a max-pool winner, since the loss is not differentiable there.
pub fn grad_check(net: &Network<f64>, x: &Tensor<f64>, obj: &Objective, cfg: &GradCheckConfig) -> Result<GradCheckReport> {
    let mut analytic = analytic_gradients(net, x, obj)?;
    if let Some(l) = cfg.flip_sign_layer {
        analytic[l].iter_mut().for_each(|g| *g = -*g);
    }
    let (_, base_kinks) = objective_loss(net, x, obj)?;

    let layers: Vec<usize> = (0..net.num_layers()).filter(|&i| !net.params(i).is_empty()).collect();
    if layers.is_empty() {
        return Ok(GradCheckReport { max_relative_error: 0.0, worst: None, checked: 0, skipped_kinks: 0 });
    }
    let budget = cfg.samples.min(MAX_SAMPLES);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // Each layer gets an equal share; the extra candidates stand in for kinks.
    let per_layer = budget.div_ceil(layers.len()).max(1);
    let mut candidates: Vec<(usize, Vec<usize>)> = layers
        .iter()
        .map(|&l| {
            let len = net.params(l).len();
            let take = (2 * per_layer).min(len);
            (l, sample(&mut rng, len, take).into_vec())
        })
        .collect();
    for (_, c) in candidates.iter_mut() {
        let off = rng.random_range(0..c.len().max(1));
        c.rotate_left(off);
    }

    let check = |net: &mut Network<f64>, layer: usize, idx: usize| -> Result<Option<f64>> {
        let orig = net.params(layer)[idx];
        net.params_mut(layer)[idx] = orig + cfg.step;
        let (plus, k_plus) = objective_loss(net, x, obj)?;
        net.params_mut(layer)[idx] = orig - cfg.step;
        let (minus, k_minus) = objective_loss(net, x, obj)?;
        net.params_mut(layer)[idx] = orig;
        if k_plus != base_kinks || k_minus != base_kinks {
            return Ok(None);
        }
        let numeric = (plus - minus) / (2.0 * cfg.step);
        let a = analytic[layer][idx];
        Ok(Some((a - numeric).abs() / a.abs().max(numeric.abs()).max(cfg.floor)))
    };

    // (layer, kinks skipped, (index, relative error) per checked weight)
    type LayerResult = (usize, usize, Vec<(usize, f64)>);
    let results: Vec<Result<LayerResult>> = candidates
        .par_iter()
        .map_init(
            || net.clone(),
            |local, (layer, idxs)| {
                let mut errs = Vec::new();
                let mut skipped = 0;
                for &i in idxs {
                    if errs.len() == per_layer {
                        break;
                    }
                    match check(local, *layer, i)? {
                        Some(e) => errs.push((i, e)),
                        None => skipped += 1,
                    }
                }
                Ok((*layer, skipped, errs))
            },
        )
        .collect();

    let mut report = GradCheckReport { max_relative_error: 0.0, worst: None, checked: 0, skipped_kinks: 0 };
    let mut remaining = budget;
    for r in results {
        let (layer, skipped, errs) = r?;
        report.skipped_kinks += skipped;
        for (i, e) in errs.into_iter().take(remaining) {
            report.checked += 1;
            remaining -= 1;
            if e > report.max_relative_error || report.worst.is_none() {
                report.max_relative_error = report.max_relative_error.max(e);
                report.worst = Some((layer, i));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::spec::{LayerSpec::*, ModelSpec};

    fn input(shape: Vec<usize>, seed: u64) -> Tensor<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = shape.iter().product();
        Tensor::new(shape, (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    fn conv_net() -> ModelSpec {
        ModelSpec::new(
            "toy",
            [2, 6, 6],
            vec![
                Conv { filters: 4, kernel: 3 },
                Relu,
                MaxPool,
                Conv { filters: 3, kernel: 3 },
                Elu,
                Flatten,
                Dense { units: 5 },
                Softmax,
            ],
        )
    }

    #[test]
    fn two_conv_one_dense() {
        let net = Network::<f64>::new(&conv_net(), 1).unwrap();
        let x = input(vec![3, 2, 6, 6], 2);
        let obj = Objective::CrossEntropy(vec![0, 3, 4]);
        let r = grad_check(&net, &x, &obj, &GradCheckConfig { samples: 300, ..Default::default() }).unwrap();
        assert!(r.checked > 100);
        assert!(r.max_relative_error < 1e-4, "{r:?}");
    }

    #[test]
    fn linear_squared_loss() {
        let spec = ModelSpec::new("lin", [1, 1, 6], vec![Flatten, Dense { units: 3 }]);
        let net = Network::<f64>::new(&spec, 5).unwrap();
        let x = input(vec![4, 1, 1, 6], 3);
        let t = input(vec![4, 3], 4);
        let r = grad_check(&net, &x, &Objective::SquaredError(t), &GradCheckConfig::default()).unwrap();
        assert_eq!(r.checked, 21);
        assert!(r.max_relative_error < 1e-8, "{r:?}");
    }

    #[test]
    fn flipped_sign_detected() {
        let net = Network::<f64>::new(&conv_net(), 1).unwrap();
        let x = input(vec![2, 2, 6, 6], 2);
        let cfg = GradCheckConfig { samples: 60, flip_sign_layer: Some(3), ..Default::default() };
        let r = grad_check(&net, &x, &Objective::CrossEntropy(vec![1, 2]), &cfg).unwrap();
        assert!(r.max_relative_error > 1e-1);
        assert_eq!(r.worst.unwrap().0, 3);
    }

    #[test]
    fn batchnorm_frozen_mode() {
        let spec = ModelSpec::new(
            "bn",
            [1, 4, 4],
            vec![Conv { filters: 3, kernel: 3 }, BatchNorm, Elu, GlobalAvgPool, Dense { units: 3 }, Softmax],
        );
        let mut net = Network::<f64>::new(&spec, 2).unwrap();
        let (m, v) = net.running_stats_mut(1);
        m.iter_mut().enumerate().for_each(|(i, x)| *x = 0.1 * i as f64);
        v.iter_mut().enumerate().for_each(|(i, x)| *x = 0.5 + i as f64);
        let x = input(vec![2, 1, 4, 4], 9);
        let r = grad_check(&net, &x, &Objective::CrossEntropy(vec![0, 2]), &GradCheckConfig::default()).unwrap();
        assert!(r.max_relative_error < 1e-4, "{r:?}");
    }
}
