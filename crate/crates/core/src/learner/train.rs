use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::augment::{augment_with, AugmentFlags};
use super::converge::{converged_early, epochs_to_converge, DEFAULT_DELTA, DEFAULT_PATIENCE};
use super::network::{Cache, Mode, Network};
use super::spec::LayerSpec;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Examples evaluated per forward pass when measuring accuracy.
const EVAL_CHUNK: usize = 256;

/// Labelled examples, `inputs` shaped `[N, ...]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub inputs: Tensor<T>,
    pub labels: Vec<usize>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(inputs: Tensor<T>, labels: Vec<usize>) -> Result<Self> {
        if inputs.shape().is_empty() || inputs.batch() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} labels for inputs shaped {:?}",
                labels.len(),
                inputs.shape()
            )));
        }
        Ok(Self { inputs, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self { inputs: self.inputs.select(indices), labels: indices.iter().map(|&i| self.labels[i]).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub seed: u64,
    pub augment: AugmentFlags,
    pub patience: usize,
    pub delta: f64,
    /// Learning rate is multiplied by `lr_decay` every `lr_step` epochs.
    pub lr_decay: f64,
    pub lr_step: usize,
    /// Stop once the convergence rule has fired with a full window.
    pub stop_when_converged: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            momentum: 0.9,
            batch_size: 32,
            max_epochs: 30,
            seed: 0,
            augment: AugmentFlags::NONE,
            patience: DEFAULT_PATIENCE,
            delta: DEFAULT_DELTA,
            lr_decay: 0.5,
            lr_step: 20,
            stop_when_converged: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must lie in [0, 1)");
        }
        if self.batch_size == 0 || self.max_epochs == 0 {
            return bad("batch size and max epochs must be at least 1");
        }
        if self.patience == 0 || self.delta.is_nan() || self.delta < 0.0 {
            return bad("patience must be at least 1 and delta non-negative");
        }
        if self.lr_decay.is_nan() || self.lr_decay <= 0.0 || self.lr_step == 0 {
            return bad("lr decay must be positive with a non-zero step");
        }
        Ok(())
    }

    fn lr_at(&self, epoch: usize) -> f64 {
        self.learning_rate * self.lr_decay.powi((epoch / self.lr_step) as i32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainResult {
    pub train_accuracy: Vec<f64>,
    pub test_accuracy: Vec<f64>,
    pub train_loss: Vec<f64>,
    /// Measured on the test-accuracy history.
    pub epochs_to_converge: usize,
    pub final_test_accuracy: f64,
    pub params: usize,
}

/// Mean cross-entropy of probability rows and its gradient with respect to
/// the logits feeding the softmax.
pub fn cross_entropy<T: Scalar>(probs: &Tensor<T>, labels: &[usize]) -> Result<(f64, Vec<T>)> {
    let n = probs.batch();
    let k = probs.item_len();
    if labels.len() != n {
        return Err(Error::ShapeMismatch(format!("{} labels for {n} rows", labels.len())));
    }
    let inv_n = T::one() / T::of_usize(n);
    let mut grad = probs.data().to_vec();
    let mut loss = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        if y >= k {
            return Err(Error::InvalidInput(format!("label {y} outside {k} classes")));
        }
        loss -= probs.data()[i * k + y].as_f64().ln();
        grad[i * k + y] -= T::one();
    }
    grad.iter_mut().for_each(|g| *g *= inv_n);
    Ok((loss / n as f64, grad))
}

fn ends_with_softmax<T: Scalar>(net: &Network<T>) -> Result<()> {
    match net.spec().layers.last() {
        Some(LayerSpec::Softmax) => Ok(()),
        _ => Err(Error::InvalidInput("classifier must end in softmax".into())),
    }
}

/// Loss and parameter gradients for one batch.
pub fn loss_and_gradients<T: Scalar>(
    net: &mut Network<T>,
    x: &Tensor<T>,
    labels: &[usize],
    mode: Mode,
    rng: Option<&mut ChaCha8Rng>,
) -> Result<(f64, Tensor<T>, Vec<Vec<T>>)> {
    ends_with_softmax(net)?;
    let (probs, caches): (Tensor<T>, Vec<Cache<T>>) = net.forward_cached(x, mode, rng)?;
    let (loss, grad) = cross_entropy(&probs, labels)?;
    let grads = net.backward_from(&caches, net.num_layers() - 1, grad, x.batch());
    Ok((loss, probs, grads))
}

/// Fraction of examples whose most probable class matches the label.
pub fn accuracy<T: Scalar>(net: &Network<T>, data: &Dataset<T>) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::InvalidInput("empty dataset".into()));
    }
    let mut correct = 0usize;
    let idx: Vec<usize> = (0..data.len()).collect();
    for chunk in idx.chunks(EVAL_CHUNK) {
        let probs = net.forward(&data.inputs.select(chunk))?;
        correct += probs.argmax_rows().iter().zip(chunk).filter(|(p, &i)| **p == data.labels[i]).count();
    }
    Ok(correct as f64 / data.len() as f64)
}

/// Minibatch SGD with momentum. Dropout and augmentation run only on the
/// training pass; accuracies are recorded after every epoch.
pub fn train<T: Scalar>(
    net: &mut Network<T>,
    train_set: &Dataset<T>,
    test_set: &Dataset<T>,
    cfg: &TrainConfig,
) -> Result<TrainResult> {
    cfg.validate()?;
    ends_with_softmax(net)?;
    if train_set.is_empty() || test_set.is_empty() {
        return Err(Error::InvalidInput("train and test splits must be non-empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut velocity: Vec<Vec<T>> = (0..net.num_layers()).map(|i| vec![T::zero(); net.params(i).len()]).collect();
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut result = TrainResult {
        train_accuracy: Vec::new(),
        test_accuracy: Vec::new(),
        train_loss: Vec::new(),
        epochs_to_converge: 0,
        final_test_accuracy: 0.0,
        params: net.param_count(),
    };
    let momentum = T::lit(cfg.momentum);
    for epoch in 1..=cfg.max_epochs {
        let lr = T::lit(cfg.lr_at(epoch - 1));
        order.shuffle(&mut rng);
        let (mut loss_sum, mut correct) = (0.0, 0usize);
        for chunk in order.chunks(cfg.batch_size) {
            let mut x = train_set.inputs.select(chunk);
            if cfg.augment.any() {
                let mut aug_rng = ChaCha8Rng::seed_from_u64(rng.random());
                x = augment_with(&x, cfg.augment, &mut aug_rng)?;
            }
            let labels: Vec<usize> = chunk.iter().map(|&i| train_set.labels[i]).collect();
            let (loss, probs, grads) = loss_and_gradients(net, &x, &labels, Mode::Train, Some(&mut rng))?;
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch, loss });
            }
            loss_sum += loss * chunk.len() as f64;
            correct += probs.argmax_rows().iter().zip(&labels).filter(|(p, y)| p == y).count();
            for (layer, (v, g)) in velocity.iter_mut().zip(&grads).enumerate() {
                let params = net.params_mut(layer);
                for ((p, v), g) in params.iter_mut().zip(v.iter_mut()).zip(g) {
                    *v = momentum * *v - lr * *g;
                    *p += *v;
                }
            }
        }
        if (0..net.num_layers()).any(|i| net.params(i).iter().any(|p| !p.is_finite())) {
            return Err(Error::Diverged { epoch, loss: f64::NAN });
        }
        result.train_loss.push(loss_sum / train_set.len() as f64);
        result.train_accuracy.push(correct as f64 / train_set.len() as f64);
        result.test_accuracy.push(accuracy(net, test_set)?);
        if cfg.stop_when_converged && converged_early(&result.test_accuracy, cfg.patience, cfg.delta) {
            break;
        }
    }
    result.epochs_to_converge = epochs_to_converge(&result.test_accuracy, cfg.patience, cfg.delta);
    result.final_test_accuracy = *result.test_accuracy.last().unwrap_or(&0.0);
    Ok(result)
}
