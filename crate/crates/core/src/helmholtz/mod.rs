//! Sensor-reading model `R = R_max − N·H`, its inversion, and the
//! accuracy-versus-quantization curve machinery used to locate the noise level.

mod curve;
mod entropy;
mod sensor;

pub use curve::{
    detect_knee, fit_curve, noise_bits_estimate, q_to_quality, quality_to_q, theoretical_accuracy,
    theoretical_curve, AccuracyCurve, CurvePoint, NoiseBits, DEFAULT_KNEE_TOLERANCE,
};
pub use entropy::{distribution_entropy, shannon_entropy};
pub use sensor::{approx_content, estimate_noise_scalar, synthesize_readings, ContentSource, SensorModel};
