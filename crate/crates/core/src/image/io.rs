use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::ImageRgb;
use crate::error::{Error, Result};

/// Raw fixture layout: width and height as u32 little-endian, then packed RGB bytes.
pub fn read_raw_rgb(path: &Path) -> Result<ImageRgb> {
    let mut bytes = Vec::new();
    File::open(path)
        .map_err(|e| not_found(path, e))?
        .read_to_end(&mut bytes)?;
    if bytes.len() < 8 {
        return Err(Error::Truncated(format!("{}: missing raw RGB header", path.display())));
    }
    let w = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let h = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let body = &bytes[8..];
    if body.len() != w * h * 3 {
        return Err(Error::Truncated(format!(
            "{}: header says {w}x{h} but {} pixel bytes follow",
            path.display(),
            body.len()
        )));
    }
    ImageRgb::new(w, h, body.to_vec())
}

pub fn write_raw_rgb(path: &Path, img: &ImageRgb) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(&(img.width() as u32).to_le_bytes())?;
    out.write_all(&(img.height() as u32).to_le_bytes())?;
    out.write_all(img.pixels())?;
    out.flush()?;
    Ok(())
}

fn not_found(path: &Path, e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::NotFound {
        Error::MissingFile(path.to_path_buf())
    } else {
        Error::Io(e)
    }
}

fn png_err(e: impl std::fmt::Display) -> Error {
    Error::UnsupportedFormat(format!("png: {e}"))
}

/// Decodes 8-bit PNGs (gray, gray+alpha, RGB, RGBA); alpha is dropped.
pub fn read_png(path: &Path) -> Result<ImageRgb> {
    let file = BufReader::new(File::open(path).map_err(|e| not_found(path, e))?);
    let mut decoder = png::Decoder::new(file);
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = decoder.read_info().map_err(png_err)?;
    let mut buf = vec![0; reader.output_buffer_size().ok_or_else(|| png_err("image too large"))?];
    let info = reader.next_frame(&mut buf).map_err(png_err)?;
    let data = &buf[..info.buffer_size()];
    let (w, h) = (info.width as usize, info.height as usize);
    let pixels: Vec<u8> = match info.color_type {
        png::ColorType::Rgb => data.to_vec(),
        png::ColorType::Rgba => data.chunks_exact(4).flat_map(|p| [p[0], p[1], p[2]]).collect(),
        png::ColorType::Grayscale => data.iter().flat_map(|&g| [g, g, g]).collect(),
        png::ColorType::GrayscaleAlpha => {
            data.chunks_exact(2).flat_map(|p| [p[0], p[0], p[0]]).collect()
        }
        other => return Err(png_err(format!("unsupported color type {other:?}"))),
    };
    ImageRgb::new(w, h, pixels)
}

pub fn write_png(path: &Path, img: &ImageRgb) -> Result<()> {
    let out = BufWriter::new(File::create(path)?);
    let mut encoder = png::Encoder::new(out, img.width() as u32, img.height() as u32);
    encoder.set_color(png::ColorType::Rgb);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header().map_err(png_err)?;
    writer.write_image_data(img.pixels()).map_err(png_err)?;
    writer.finish().map_err(png_err)?;
    Ok(())
}
