//! Binary model snapshots.
//!
//! Layout, little-endian throughout:
//!
//! ```text
//! magic "NBCK" | u32 version | u32 spec length | spec JSON
//! u32 layer count, then per layer: u32 params | u32 running stats
//! f32 params..., f32 running means..., f32 running variances... per layer
//! ```

use std::fs;
use std::path::Path;

use super::network::Network;
use super::spec::ModelSpec;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAGIC: &[u8; 4] = b"NBCK";
pub const CHECKPOINT_VERSION: u32 = 1;

fn put_u32(buf: &mut Vec<u8>, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::InvalidInput(format!("{v} does not fit a u32 field")))?;
    buf.extend_from_slice(&v.to_le_bytes());
    Ok(())
}

pub fn checkpoint_bytes<T: Scalar>(net: &Network<T>) -> Result<Vec<u8>> {
    let spec = serde_json::to_vec(net.spec())?;
    let mut buf = Vec::with_capacity(16 + spec.len() + 4 * net.param_count());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    put_u32(&mut buf, spec.len())?;
    buf.extend_from_slice(&spec);
    put_u32(&mut buf, net.num_layers())?;
    for i in 0..net.num_layers() {
        put_u32(&mut buf, net.params(i).len())?;
        put_u32(&mut buf, net.running_stats(i).0.len())?;
    }
    for i in 0..net.num_layers() {
        let (mean, var) = net.running_stats(i);
        for v in net.params(i).iter().chain(mean).chain(var) {
            buf.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
        }
    }
    Ok(buf)
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.data.len());
        let end = end.ok_or_else(|| Error::Truncated(format!("checkpoint ends at byte {}", self.data.len())))?;
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn f32s<T: Scalar>(&mut self, n: usize) -> Result<Vec<T>> {
        let raw = self.take(n.checked_mul(4).ok_or_else(|| Error::Truncated("length overflow".into()))?)?;
        Ok(raw.chunks_exact(4).map(|c| T::lit(f32::from_le_bytes(c.try_into().unwrap()) as f64)).collect())
    }
}

pub fn parse_checkpoint<T: Scalar>(data: &[u8]) -> Result<Network<T>> {
    let mut r = Reader { data, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::UnsupportedFormat("not a model checkpoint".into()));
    }
    let version = r.u32()? as u32;
    if version != CHECKPOINT_VERSION {
        return Err(Error::UnsupportedFormat(format!("checkpoint version {version}")));
    }
    let spec_len = r.u32()?;
    let spec: ModelSpec = serde_json::from_slice(r.take(spec_len)?)?;
    let mut net = Network::<T>::new(&spec, 0)?;
    let layers = r.u32()?;
    if layers != net.num_layers() {
        return Err(Error::ShapeMismatch(format!("layer table has {layers} entries, spec has {}", net.num_layers())));
    }
    let mut table = Vec::with_capacity(layers);
    for i in 0..layers {
        let (p, s) = (r.u32()?, r.u32()?);
        if p != net.params(i).len() || s != net.running_stats(i).0.len() {
            return Err(Error::ShapeMismatch(format!("layer {i}: table lists {p} params and {s} statistics")));
        }
        table.push((p, s));
    }
    for (i, (p, s)) in table.into_iter().enumerate() {
        let params = r.f32s::<T>(p)?;
        net.params_mut(i).copy_from_slice(&params);
        let mean = r.f32s::<T>(s)?;
        let var = r.f32s::<T>(s)?;
        let (m, v) = net.running_stats_mut(i);
        *m = mean;
        *v = var;
    }
    if r.pos != data.len() {
        return Err(Error::InvalidInput(format!("{} trailing bytes in checkpoint", data.len() - r.pos)));
    }
    Ok(net)
}

pub fn save_checkpoint<T: Scalar>(path: &Path, net: &Network<T>) -> Result<()> {
    fs::write(path, checkpoint_bytes(net)?)?;
    Ok(())
}

pub fn load_checkpoint<T: Scalar>(path: &Path) -> Result<Network<T>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    parse_checkpoint(&fs::read(path)?)
}
