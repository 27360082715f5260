use super::{ImageRgb, ImageYuv420, Plane};
use crate::error::Result;

#[inline]
fn to_u8(x: f64) -> u8 {
    x.round().clamp(0.0, 255.0) as u8
}

#[inline]
fn rgb_to_ycc(p: [u8; 3]) -> (f64, f64, f64) {
    let (r, g, b) = (p[0] as f64, p[1] as f64, p[2] as f64);
    let y = 0.299 * r + 0.587 * g + 0.114 * b;
    let u = -0.168_736 * r - 0.331_264 * g + 0.5 * b + 128.0;
    let v = 0.5 * r - 0.418_688 * g - 0.081_312 * b + 128.0;
    (y, u, v)
}

/// Full-range BT.601 conversion with 2×2 box-averaged chroma.
///
/// Odd trailing rows/columns average over the pixels that exist.
pub fn rgb_to_yuv420(img: &ImageRgb) -> Result<ImageYuv420> {
    let (w, h) = (img.width(), img.height());
    let (cw, ch) = (w.div_ceil(2), h.div_ceil(2));
    let mut y_plane = Vec::with_capacity(w * h);
    let mut u_full = Vec::with_capacity(w * h);
    let mut v_full = Vec::with_capacity(w * h);
    for yy in 0..h {
        for xx in 0..w {
            let (y, u, v) = rgb_to_ycc(img.get(xx, yy));
            y_plane.push(to_u8(y));
            u_full.push(u);
            v_full.push(v);
        }
    }
    let mut u_plane = Vec::with_capacity(cw * ch);
    let mut v_plane = Vec::with_capacity(cw * ch);
    for cy in 0..ch {
        for cx in 0..cw {
            let (mut su, mut sv, mut n) = (0.0, 0.0, 0.0);
            for yy in (2 * cy)..(2 * cy + 2).min(h) {
                for xx in (2 * cx)..(2 * cx + 2).min(w) {
                    su += u_full[yy * w + xx];
                    sv += v_full[yy * w + xx];
                    n += 1.0;
                }
            }
            u_plane.push(to_u8(su / n));
            v_plane.push(to_u8(sv / n));
        }
    }
    Ok(ImageYuv420 {
        y: Plane { width: w, height: h, samples: y_plane },
        u: Plane { width: cw, height: ch, samples: u_plane },
        v: Plane { width: cw, height: ch, samples: v_plane },
    })
}

/// Inverse of [`rgb_to_yuv420`] with nearest-neighbor chroma upsampling.
pub fn yuv420_to_rgb(img: &ImageYuv420) -> Result<ImageRgb> {
    let (w, h) = (img.width(), img.height());
    let mut pixels = Vec::with_capacity(w * h * 3);
    for yy in 0..h {
        for xx in 0..w {
            let y = img.y.get(xx, yy) as f64;
            let u = img.u.get(xx / 2, yy / 2) as f64 - 128.0;
            let v = img.v.get(xx / 2, yy / 2) as f64 - 128.0;
            pixels.push(to_u8(y + 1.402 * v));
            pixels.push(to_u8(y - 0.344_136 * u - 0.714_136 * v));
            pixels.push(to_u8(y + 1.772 * u));
        }
    }
    ImageRgb::new(w, h, pixels)
}
