//! JPEG-style perceptual transcoder.
//!
//! The pipeline is color transform, 4:2:0 chroma subsampling, 8×8 block DCT,
//! quality-scaled quantization with the Annex K tables, and the inverse path.
//! No bitstream is produced; [`CodecStats`] reports the entropy of the
//! quantized coefficients instead.

mod codec;
mod color;
mod dct;
mod io;
mod quant;

pub use codec::{psnr, transcode_image, CodecStats};
pub use color::{rgb_to_yuv420, yuv420_to_rgb};
pub use dct::{forward_dct, forward_dct_shifted, inverse_dct, inverse_dct_unclamped, CoeffBlock};
pub use io::{read_png, read_raw_rgb, write_png, write_raw_rgb};
pub use quant::{
    dequantize_block, quantize_block, scale_factor, scale_quant_table, validate_quality,
    QuantTable, QuantizedBlock, ScaleMode, TableRole, K1_LUMINANCE, K2_CHROMINANCE, ZIGZAG,
};

use crate::error::{Error, Result};

/// Interleaved 8-bit RGB image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageRgb {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl ImageRgb {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height * 3 {
            return Err(Error::InvalidInput(format!(
                "pixel buffer holds {} bytes, expected {}",
                pixels.len(),
                width * height * 3
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        let pixels = rgb.iter().copied().cycle().take(width * height * 3).collect();
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }
}

/// An 8-bit sample plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub samples: Vec<u8>,
}

impl Plane {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.samples[y * self.width + x]
    }
}

/// Full-resolution luma with chroma planes at half resolution (rounded up).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageYuv420 {
    pub y: Plane,
    pub u: Plane,
    pub v: Plane,
}

impl ImageYuv420 {
    pub fn width(&self) -> usize {
        self.y.width
    }

    pub fn height(&self) -> usize {
        self.y.height
    }
}
