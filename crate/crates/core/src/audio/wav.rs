use std::path::Path;

use super::PcmSignal;
use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 1;
const FORMAT_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

fn u16_at(b: &[u8], i: usize) -> u16 {
    u16::from_le_bytes([b[i], b[i + 1]])
}

fn u32_at(b: &[u8], i: usize) -> u32 {
    u32::from_le_bytes([b[i], b[i + 1], b[i + 2], b[i + 3]])
}

/// Parses a RIFF/WAVE file holding 16-bit mono PCM.
pub fn parse_wav(bytes: &[u8]) -> Result<PcmSignal> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::UnsupportedFormat("not a RIFF/WAVE file".into()));
    }
    let mut fmt: Option<(u16, u16, u32, u16)> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(size)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| Error::Truncated(format!("chunk {:?} overruns file", String::from_utf8_lossy(id))))?;
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(Error::Truncated("fmt chunk shorter than 16 bytes".into()));
                }
                let mut format = u16_at(body, 0);
                if format == FORMAT_EXTENSIBLE {
                    if body.len() < 26 {
                        return Err(Error::Truncated("extensible fmt chunk too short".into()));
                    }
                    format = u16_at(body, 24);
                }
                fmt = Some((format, u16_at(body, 2), u32_at(body, 4), u16_at(body, 14)));
            }
            b"data" => {
                let (format, channels, rate, bits) =
                    fmt.ok_or_else(|| Error::UnsupportedFormat("data chunk before fmt chunk".into()))?;
                match format {
                    FORMAT_PCM => {}
                    FORMAT_FLOAT => {
                        return Err(Error::UnsupportedFormat("floating-point WAV; need 16-bit PCM".into()))
                    }
                    other => {
                        return Err(Error::UnsupportedFormat(format!(
                            "compressed WAV (format tag {other:#06x}); need 16-bit PCM"
                        )))
                    }
                }
                if channels != 1 {
                    return Err(Error::UnsupportedFormat(format!(
                        "{channels}-channel WAV; only mono is supported"
                    )));
                }
                if bits != 16 {
                    return Err(Error::UnsupportedFormat(format!("{bits}-bit WAV; need 16-bit")));
                }
                if !body.len().is_multiple_of(2) {
                    return Err(Error::Truncated("odd number of bytes in 16-bit data chunk".into()));
                }
                let samples = body.chunks_exact(2).map(|c| i16::from_le_bytes([c[0], c[1]])).collect();
                return PcmSignal::new(samples, rate);
            }
            _ => {}
        }
        pos = body_end + (size & 1);
    }
    Err(Error::Truncated("no data chunk".into()))
}

pub fn read_wav(path: &Path) -> Result<PcmSignal> {
    let bytes = std::fs::read(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::Io(e)
        }
    })?;
    parse_wav(&bytes).map_err(|e| match e {
        Error::UnsupportedFormat(m) => Error::UnsupportedFormat(format!("{}: {m}", path.display())),
        Error::Truncated(m) => Error::Truncated(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Canonical 44-byte-header PCM16 mono encoding.
pub fn wav_bytes(signal: &PcmSignal) -> Vec<u8> {
    let data_len = (signal.len() * 2) as u32;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&signal.rate().to_le_bytes());
    out.extend_from_slice(&(signal.rate() * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for s in signal.samples() {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}

pub fn write_wav(path: &Path, signal: &PcmSignal) -> Result<()> {
    std::fs::write(path, wav_bytes(signal))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(format: u16, channels: u16, bits: u16) -> Vec<u8> {
        let mut b = wav_bytes(&PcmSignal::new(vec![1, 2, 3, 4], 44100).unwrap());
        b[20..22].copy_from_slice(&format.to_le_bytes());
        b[22..24].copy_from_slice(&channels.to_le_bytes());
        b[34..36].copy_from_slice(&bits.to_le_bytes());
        b
    }

    #[test]
    fn round_trip_is_exact() {
        let s = PcmSignal::new(vec![i16::MIN, -1, 0, 1, i16::MAX], 22050).unwrap();
        assert_eq!(parse_wav(&wav_bytes(&s)).unwrap(), s);
    }

    #[test]
    fn rejects_stereo_float_and_compressed() {
        for (fmt, ch, bits, needle) in [
            (1u16, 2u16, 16u16, "mono"),
            (3, 1, 32, "floating-point"),
            (0x55, 1, 16, "compressed"),
            (1, 1, 8, "16-bit"),
        ] {
            match parse_wav(&header(fmt, ch, bits)) {
                Err(Error::UnsupportedFormat(m)) => assert!(m.contains(needle), "{m}"),
                other => panic!("expected unsupported format, got {other:?}"),
            }
        }
    }

    #[test]
    fn skips_unknown_chunks_with_padding() {
        let s = PcmSignal::new(vec![7, -7], 8000).unwrap();
        let plain = wav_bytes(&s);
        let mut b = plain[..36].to_vec();
        b.extend_from_slice(b"LIST");
        b.extend_from_slice(&3u32.to_le_bytes());
        b.extend_from_slice(&[1, 2, 3, 0]);
        b.extend_from_slice(&plain[36..]);
        assert_eq!(parse_wav(&b).unwrap(), s);
    }

    #[test]
    fn truncated_and_garbage() {
        let b = wav_bytes(&PcmSignal::new(vec![1, 2, 3], 8000).unwrap());
        assert!(matches!(parse_wav(&b[..b.len() - 3]), Err(Error::Truncated(_))));
        assert!(parse_wav(b"hello").is_err());
        assert!(parse_wav(&b[..36]).is_err());
    }
}
