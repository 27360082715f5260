use std::path::Path;

use crate::error::{Error, Result};

/// Writes `u32 ndim`, `ndim × u32 dims`, then the values as f32, all little-endian.
pub fn write_tensor_file(path: &Path, dims: &[usize], values: &[f32]) -> Result<()> {
    let expected: usize = dims.iter().product();
    if expected != values.len() {
        return Err(Error::ShapeMismatch(format!("dims {dims:?} but {} values", values.len())));
    }
    let mut out = Vec::with_capacity(4 + 4 * dims.len() + 4 * values.len());
    out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for &d in dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_tensor_file(path: &Path) -> Result<(Vec<usize>, Vec<f32>)> {
    let bytes = std::fs::read(path)?;
    let word = |i: usize| -> Result<u32> {
        bytes
            .get(4 * i..4 * i + 4)
            .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
            .ok_or_else(|| Error::Truncated(format!("{}: header cut short", path.display())))
    };
    let ndim = word(0)? as usize;
    let dims = (0..ndim).map(|i| word(1 + i).map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
    let body = &bytes[4 * (1 + ndim)..];
    let count: usize = dims.iter().product();
    if body.len() != 4 * count {
        return Err(Error::Truncated(format!(
            "{}: expected {count} floats, found {} bytes",
            path.display(),
            body.len()
        )));
    }
    let values = body.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((dims, values))
}
