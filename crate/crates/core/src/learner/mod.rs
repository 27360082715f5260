//! Small CPU neural-network engine: layers, SGD training, convergence
//! measurement and a finite-difference gradient checker.

mod augment;
mod checkpoint;
mod converge;
mod gradcheck;
mod network;
mod spec;
mod tensor;
mod train;
mod zoo;

pub use augment::{augment, augment_with, AugmentFlags};
pub use checkpoint::{checkpoint_bytes, load_checkpoint, parse_checkpoint, save_checkpoint, CHECKPOINT_VERSION};
pub use converge::{converged_early, epochs_to_converge, DEFAULT_DELTA, DEFAULT_PATIENCE};
pub use gradcheck::{analytic_gradients, grad_check, GradCheckConfig, GradCheckReport, Objective, MAX_SAMPLES};
pub use network::{Cache, Gradients, Mode, Network};
pub use spec::{count_params, LayerSpec, ModelSpec, Shape};
pub use tensor::Tensor;
pub use train::{accuracy, cross_entropy, loss_and_gradients, train, Dataset, TrainConfig, TrainResult};
pub use zoo::ZooId;
