//! Native raster files: an 8-byte magic, `u32` width, height and channel
//! count, then the samples as little-endian `f32`, row-major and
//! channel-interleaved. Everything little-endian.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::Raster;

pub const RAW_MAGIC: &[u8; 8] = b"MPIR1\0\0\0";
pub const RAW_HEADER_LEN: usize = 8 + 3 * 4;

pub fn encode_raw(r: &Raster) -> Vec<u8> {
    let mut out = Vec::with_capacity(RAW_HEADER_LEN + r.data().len() * 4);
    out.extend_from_slice(RAW_MAGIC);
    for d in [r.width(), r.height(), r.channels()] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in r.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Parses a raw raster; `path` only labels errors.
pub fn decode_raw(bytes: &[u8], path: &Path) -> Result<Raster> {
    if bytes.len() < RAW_HEADER_LEN {
        return Err(Error::format(path, "truncated header"));
    }
    if &bytes[..8] != RAW_MAGIC {
        return Err(Error::format(path, "bad magic, not an MPIR1 raster"));
    }
    let dim = |i: usize| u32::from_le_bytes(bytes[8 + 4 * i..12 + 4 * i].try_into().unwrap()) as usize;
    let (w, h, c) = (dim(0), dim(1), dim(2));
    let expected = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(c))
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::format(path, "dimensions overflow"))?;
    let body = &bytes[RAW_HEADER_LEN..];
    if body.len() != expected {
        return Err(Error::format(
            path,
            format!(
                "{w}x{h}x{c} raster needs {expected} data bytes, file has {}",
                body.len()
            ),
        ));
    }
    let data = body
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    Raster::from_vec(w, h, c, data).map_err(|e| Error::format(path, e.to_string()))
}

pub fn write_raw(path: impl AsRef<Path>, r: &Raster) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_raw(r)).map_err(|e| Error::io(path, e))
}

pub fn read_raw(path: impl AsRef<Path>) -> Result<Raster> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_raw(&bytes, path)
}
