//! Bit-level measurement of the noise content of images and audio.
//!
//! A sensor reading is modeled as `R = R_max − N·H`: the maximum reading minus
//! an information term `H` weighted by a noise scalar `N`. Perceptual
//! quantization (JPEG-style for images, MDCT-based for audio) strips low-order
//! information; training a classifier at a ladder of quantization levels and
//! locating the knee of the accuracy curve yields an estimate of how many bits
//! per sample are content and how many are noise.
//!
//! Numeric code is generic over [`Scalar`] (`f32`, `f64`); the aliases below
//! name the concrete instantiations used by the harness and the tests.

pub mod audio;
pub mod bits;
pub mod error;
pub mod helmholtz;
pub mod image;
pub mod learner;
pub mod plot;
pub mod scalar;
pub mod sweep;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Single-precision network, used for training.
pub type Network32 = learner::Network<f32>;
/// Double-precision network, used for gradient checks.
pub type Network64 = learner::Network<f64>;
pub type Tensor32 = learner::Tensor<f32>;
pub type Tensor64 = learner::Tensor<f64>;
pub type Mdct64 = audio::Mdct<f64>;
pub type Mdct32 = audio::Mdct<f32>;
pub type CoeffBlock64 = image::CoeffBlock<f64>;
