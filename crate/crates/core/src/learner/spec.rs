use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One layer of a declarative model description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LayerSpec {
    /// Stride 1, zero "same" padding, odd square kernel.
    Conv { filters: usize, kernel: usize },
    Dense { units: usize },
    /// 2×2, stride 2, partial windows kept at odd edges.
    MaxPool,
    GlobalAvgPool,
    BatchNorm,
    Dropout { rate: f64 },
    Relu,
    Elu,
    Flatten,
    Softmax,
}

/// Activation shape of a single example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    Map { channels: usize, height: usize, width: usize },
    Flat(usize),
}

impl Shape {
    pub fn size(self) -> usize {
        match self {
            Shape::Map { channels, height, width } => channels * height * width,
            Shape::Flat(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    /// `[channels, height, width]`.
    pub input: [usize; 3],
    pub layers: Vec<LayerSpec>,
}

impl ModelSpec {
    pub fn new(name: impl Into<String>, input: [usize; 3], layers: Vec<LayerSpec>) -> Self {
        Self { name: name.into(), input, layers }
    }

    pub fn input_shape(&self) -> Shape {
        let [channels, height, width] = self.input;
        Shape::Map { channels, height, width }
    }

    /// Output shape after every layer, checking that the chain is well-formed.
    pub fn shapes(&self) -> Result<Vec<Shape>> {
        let mut cur = self.input_shape();
        if cur.size() == 0 {
            return Err(Error::ShapeMismatch(format!("{}: empty input", self.name)));
        }
        let mut out = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let bad = |why: &str| Error::ShapeMismatch(format!("{} layer {i} ({layer:?}): {why}", self.name));
            cur = match (*layer, cur) {
                (LayerSpec::Conv { filters, kernel }, Shape::Map { height, width, .. }) => {
                    if kernel % 2 == 0 || filters == 0 {
                        return Err(bad("kernel must be odd and filters positive"));
                    }
                    Shape::Map { channels: filters, height, width }
                }
                (LayerSpec::Conv { .. }, _) => return Err(bad("convolution needs a feature map")),
                (LayerSpec::Dense { units }, Shape::Flat(_)) if units > 0 => Shape::Flat(units),
                (LayerSpec::Dense { .. }, _) => return Err(bad("dense layer needs flat input")),
                (LayerSpec::MaxPool, Shape::Map { channels, height, width }) => {
                    Shape::Map { channels, height: height.div_ceil(2), width: width.div_ceil(2) }
                }
                (LayerSpec::GlobalAvgPool, Shape::Map { channels, .. }) => Shape::Flat(channels),
                (LayerSpec::MaxPool | LayerSpec::GlobalAvgPool, _) => {
                    return Err(bad("pooling needs a feature map"))
                }
                (LayerSpec::Flatten, s) => Shape::Flat(s.size()),
                (LayerSpec::Dropout { rate }, s) => {
                    if !(0.0..1.0).contains(&rate) {
                        return Err(bad("dropout rate must lie in [0, 1)"));
                    }
                    s
                }
                (LayerSpec::Softmax, Shape::Flat(n)) => {
                    if i + 1 != self.layers.len() {
                        return Err(bad("softmax must be the last layer"));
                    }
                    Shape::Flat(n)
                }
                (LayerSpec::Softmax, _) => return Err(bad("softmax needs flat input")),
                (LayerSpec::BatchNorm | LayerSpec::Relu | LayerSpec::Elu, s) => s,
            };
            out.push(cur);
        }
        Ok(out)
    }

    pub fn output_width(&self) -> Result<usize> {
        Ok(self.shapes()?.last().copied().unwrap_or(self.input_shape()).size())
    }

    /// Checks the chain and that the classifier head has `classes` outputs.
    pub fn validate(&self, classes: usize) -> Result<()> {
        let width = self.output_width()?;
        if width != classes {
            return Err(Error::ShapeMismatch(format!(
                "{}: output width {width} but {classes} classes",
                self.name
            )));
        }
        Ok(())
    }

    /// Number of parameters per layer (trainable only).
    pub fn layer_params(&self) -> Result<Vec<usize>> {
        let shapes = self.shapes()?;
        let mut prev = self.input_shape();
        let mut counts = Vec::with_capacity(self.layers.len());
        for (layer, &shape) in self.layers.iter().zip(&shapes) {
            let n = match (*layer, prev) {
                (LayerSpec::Conv { filters, kernel }, Shape::Map { channels, .. }) => {
                    kernel * kernel * channels * filters + filters
                }
                (LayerSpec::Dense { units }, Shape::Flat(inputs)) => inputs * units + units,
                (LayerSpec::BatchNorm, Shape::Map { channels, .. }) => 2 * channels,
                (LayerSpec::BatchNorm, Shape::Flat(n)) => 2 * n,
                _ => 0,
            };
            counts.push(n);
            prev = shape;
        }
        Ok(counts)
    }
}

/// Trainable parameter count of a model.
pub fn count_params(spec: &ModelSpec) -> Result<usize> {
    Ok(spec.layer_params()?.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_dense_layer() {
        let spec = ModelSpec::new("fc", [10, 1, 1], vec![LayerSpec::Flatten, LayerSpec::Dense { units: 10 }]);
        assert_eq!(count_params(&spec).unwrap(), 110);
    }

    #[test]
    fn first_image_conv() {
        let spec = ModelSpec::new("c", [3, 32, 32], vec![LayerSpec::Conv { filters: 32, kernel: 3 }]);
        assert_eq!(count_params(&spec).unwrap(), 9 * 3 * 32 + 32);
    }

    #[test]
    fn batch_norm_counts_two_per_channel() {
        let spec = ModelSpec::new(
            "bn",
            [1, 8, 8],
            vec![LayerSpec::Conv { filters: 4, kernel: 3 }, LayerSpec::BatchNorm],
        );
        assert_eq!(spec.layer_params().unwrap(), vec![40, 8]);
    }

    #[test]
    fn chain_errors() {
        let dense_on_map = ModelSpec::new("x", [3, 4, 4], vec![LayerSpec::Dense { units: 3 }]);
        assert!(matches!(count_params(&dense_on_map), Err(Error::ShapeMismatch(_))));
        let softmax_mid = ModelSpec::new(
            "x",
            [4, 1, 1],
            vec![LayerSpec::Flatten, LayerSpec::Softmax, LayerSpec::Dense { units: 2 }],
        );
        assert!(softmax_mid.shapes().is_err());
        let even_kernel = ModelSpec::new("x", [1, 4, 4], vec![LayerSpec::Conv { filters: 2, kernel: 2 }]);
        assert!(even_kernel.shapes().is_err());
    }

    #[test]
    fn pooling_keeps_partial_windows() {
        let spec = ModelSpec::new("p", [2, 5, 1], vec![LayerSpec::MaxPool]);
        assert_eq!(spec.shapes().unwrap()[0], Shape::Map { channels: 2, height: 3, width: 1 });
    }

    #[test]
    fn validate_head_width() {
        let spec = ModelSpec::new("fc", [4, 1, 1], vec![LayerSpec::Flatten, LayerSpec::Dense { units: 3 }]);
        assert!(spec.validate(3).is_ok());
        assert!(spec.validate(10).is_err());
    }
}
