//! Image and audio architecture zoos.
//!
//! Image models follow the VGG/all-convolutional family (ReLU); audio models
//! stack a conv stem with "conv loops" (conv, ELU, max-pool, dropout 0.5) and
//! "FC loops" (dense, ELU, dropout 0.6). Hidden dense layers carry an
//! activation even where a layer table lists only dense and dropout rows.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::spec::{LayerSpec, ModelSpec};
use crate::error::{Error, Result};

pub const IMAGE_CLASSES: usize = 10;
pub const AUDIO_CLASSES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ZooId {
    ImageA,
    ImageB,
    ImageC,
    ImageD,
    ImageE,
    ImageF,
    AudioA,
    AudioB,
    AudioC,
    AudioD,
    AudioE,
    AudioF,
}

impl ZooId {
    pub const ALL: [ZooId; 12] = [
        ZooId::ImageA,
        ZooId::ImageB,
        ZooId::ImageC,
        ZooId::ImageD,
        ZooId::ImageE,
        ZooId::ImageF,
        ZooId::AudioA,
        ZooId::AudioB,
        ZooId::AudioC,
        ZooId::AudioD,
        ZooId::AudioE,
        ZooId::AudioF,
    ];

    pub fn is_image(self) -> bool {
        matches!(
            self,
            ZooId::ImageA | ZooId::ImageB | ZooId::ImageC | ZooId::ImageD | ZooId::ImageE | ZooId::ImageF
        )
    }

    pub fn default_classes(self) -> usize {
        if self.is_image() {
            IMAGE_CLASSES
        } else {
            AUDIO_CLASSES
        }
    }

    /// Parameter totals as published for the full-size inputs. Entries without
    /// an exact table footer use the rounded figure (e.g. 1.08M).
    pub fn published_params(self) -> u64 {
        match self {
            ZooId::ImageA => 701_386,
            ZooId::ImageB => 1_080_000,
            ZooId::ImageC => 1_144_138,
            ZooId::ImageD => 1_280_000,
            ZooId::ImageE => 1_620_000,
            ZooId::ImageF => 1_686_090,
            ZooId::AudioA => 101_412,
            ZooId::AudioB => 170_000,
            ZooId::AudioC => 430_000,
            ZooId::AudioD => 810_000,
            ZooId::AudioE => 824_868,
            ZooId::AudioF => 3_715_460,
        }
    }

    pub fn spec(self, input: [usize; 3], classes: usize) -> ModelSpec {
        let layers = if self.is_image() { image_layers(self, classes) } else { audio_layers(self, classes) };
        ModelSpec::new(self.to_string(), input, layers)
    }
}

impl fmt::Display for ZooId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, letter) = match self {
            ZooId::ImageA => ("image", 'A'),
            ZooId::ImageB => ("image", 'B'),
            ZooId::ImageC => ("image", 'C'),
            ZooId::ImageD => ("image", 'D'),
            ZooId::ImageE => ("image", 'E'),
            ZooId::ImageF => ("image", 'F'),
            ZooId::AudioA => ("audio", 'A'),
            ZooId::AudioB => ("audio", 'B'),
            ZooId::AudioC => ("audio", 'C'),
            ZooId::AudioD => ("audio", 'D'),
            ZooId::AudioE => ("audio", 'E'),
            ZooId::AudioF => ("audio", 'F'),
        };
        write!(f, "{kind}-{letter}")
    }
}

impl FromStr for ZooId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ZooId::ALL
            .into_iter()
            .find(|z| z.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown architecture `{s}`")))
    }
}

impl From<ZooId> for String {
    fn from(z: ZooId) -> String {
        z.to_string()
    }
}

impl TryFrom<String> for ZooId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

use LayerSpec::*;

fn conv(filters: usize) -> LayerSpec {
    Conv { filters, kernel: 3 }
}

/// Conv(32)+ReLU, Conv(64)+ReLU, Conv(128)+Dropout, Conv(128)+ReLU ×2, Conv(128)+Dropout.
fn image_trunk() -> Vec<LayerSpec> {
    vec![
        conv(32),
        Relu,
        conv(64),
        Relu,
        conv(128),
        Dropout { rate: 0.5 },
        conv(128),
        Relu,
        conv(128),
        Relu,
        conv(128),
        Dropout { rate: 0.5 },
    ]
}

fn conv_pair() -> [LayerSpec; 4] {
    [conv(128), Relu, conv(128), Relu]
}

fn all_conv_head(classes: usize) -> [LayerSpec; 3] {
    [conv(classes), GlobalAvgPool, Softmax]
}

fn dense_head(hidden: &[usize], classes: usize) -> Vec<LayerSpec> {
    let mut l = vec![Flatten];
    for &units in hidden {
        l.extend([Dense { units }, Relu, Dropout { rate: 0.5 }]);
    }
    l.extend([Dense { units: classes }, Softmax]);
    l
}

fn image_layers(id: ZooId, classes: usize) -> Vec<LayerSpec> {
    let mut l = image_trunk();
    match id {
        ZooId::ImageA => {
            l.extend(conv_pair());
            l.extend(all_conv_head(classes));
        }
        ZooId::ImageB => {
            l.extend(conv_pair());
            l.extend(dense_head(&[128, 128], classes));
        }
        ZooId::ImageC => {
            l.extend(conv_pair());
            l.extend([conv(128), Dropout { rate: 0.5 }]);
            l.extend(conv_pair());
            l.extend(all_conv_head(classes));
        }
        ZooId::ImageD => {
            l.extend(conv_pair());
            l.extend([conv(128), Dropout { rate: 0.5 }]);
            l.extend(conv_pair());
            l.extend(dense_head(&[128, 128], classes));
        }
        ZooId::ImageE => {
            l.extend(conv_pair());
            l.extend(dense_head(&[256, 256], classes));
        }
        ZooId::ImageF => l.extend(dense_head(&[128, 256, 256], classes)),
        _ => unreachable!("audio id in image zoo"),
    }
    l
}

fn audio_layers(id: ZooId, classes: usize) -> Vec<LayerSpec> {
    let (conv_loops, fc_loops): (usize, &[usize]) = match id {
        ZooId::AudioA => (3, &[]),
        ZooId::AudioB => (4, &[128]),
        ZooId::AudioC => (3, &[64, 128]),
        ZooId::AudioD => (3, &[128]),
        ZooId::AudioE => (3, &[128, 128]),
        ZooId::AudioF => (2, &[128]),
        _ => unreachable!("image id in audio zoo"),
    };
    let mut l = vec![conv(32), BatchNorm, Relu];
    for _ in 0..conv_loops {
        l.extend([conv(32), Elu, MaxPool, Dropout { rate: 0.5 }]);
    }
    l.push(Flatten);
    for &units in fc_loops {
        l.extend([Dense { units }, Elu, Dropout { rate: 0.6 }]);
    }
    l.extend([Dense { units: classes }, Softmax]);
    l
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::count_params;

    /// Hand count for image-A on 32×32×3 input.
    #[test]
    fn image_a_closed_form() {
        let conv = |cin: usize, cout: usize| 9 * cin * cout + cout;
        let want = conv(3, 32) + conv(32, 64) + conv(64, 128) + 5 * conv(128, 128) + conv(128, 10);
        let spec = ZooId::ImageA.spec([3, 32, 32], 10);
        assert_eq!(count_params(&spec).unwrap(), want);
        assert_eq!(want, 842_698);
    }

    #[test]
    fn every_spec_is_well_formed() {
        for id in ZooId::ALL {
            let input = if id.is_image() { [3, 32, 32] } else { [1, 96, 64] };
            id.spec(input, id.default_classes()).validate(id.default_classes()).unwrap();
            id.spec([input[0], 8, 8], id.default_classes()).validate(id.default_classes()).unwrap();
        }
    }

    #[test]
    fn names_round_trip() {
        for id in ZooId::ALL {
            assert_eq!(id.to_string().parse::<ZooId>().unwrap(), id);
        }
        assert!("image-Z".parse::<ZooId>().is_err());
        assert_eq!(serde_json::to_string(&ZooId::AudioC).unwrap(), "\"audio-C\"");
    }
}
