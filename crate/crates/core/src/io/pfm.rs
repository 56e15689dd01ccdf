//! Portable float maps. Written little-endian (scale `-1.0`); rows are
//! stored bottom-to-top as the format requires.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::Raster;

pub fn encode_pfm(r: &Raster) -> Result<Vec<u8>> {
    let tag = match r.channels() {
        1 => "Pf",
        3 => "PF",
        c => {
            return Err(Error::invalid(format!(
                "PFM holds 1 or 3 channels, raster has {c}"
            )))
        }
    };
    let mut out = format!("{tag}\n{} {}\n-1.0\n", r.width(), r.height()).into_bytes();
    let row_len = r.width() * r.channels();
    if row_len > 0 {
        for row in r.data().chunks_exact(row_len).rev() {
            for v in row {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    Ok(out)
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a str> {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    std::str::from_utf8(&bytes[start..*pos]).ok().filter(|s| !s.is_empty())
}

pub fn decode_pfm(bytes: &[u8], path: &Path) -> Result<Raster> {
    let bad = |reason: &str| Error::format(path, format!("malformed PFM header: {reason}"));
    let mut pos = 0;
    let channels = match next_token(bytes, &mut pos) {
        Some("PF") => 3,
        Some("Pf") => 1,
        _ => return Err(bad("expected PF or Pf")),
    };
    let mut num = |what: &str| -> Result<&str> { next_token(bytes, &mut pos).ok_or_else(|| bad(what)) };
    let w: usize = num("width")?.parse().map_err(|_| bad("width"))?;
    let h: usize = num("height")?.parse().map_err(|_| bad("height"))?;
    let scale: f64 = num("scale")?.parse().map_err(|_| bad("scale"))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(bad("scale must be non-zero"));
    }
    // exactly one whitespace byte separates the header from the samples
    pos += 1;
    let little = scale < 0.0;
    let n = w * h * channels;
    let body = bytes.get(pos..).unwrap_or(&[]);
    if body.len() != n * 4 {
        return Err(Error::format(
            path,
            format!("expected {} data bytes, found {}", n * 4, body.len()),
        ));
    }
    let mut data = vec![0.0f32; n];
    let row_len = w * channels;
    if row_len > 0 {
        for (src_row, dst_row) in body.chunks_exact(row_len * 4).zip(data.chunks_exact_mut(row_len).rev()) {
            for (b, d) in src_row.chunks_exact(4).zip(dst_row) {
                let b: [u8; 4] = b.try_into().unwrap();
                *d = if little { f32::from_le_bytes(b) } else { f32::from_be_bytes(b) };
            }
        }
    }
    Raster::from_vec(w, h, channels, data).map_err(|e| Error::format(path, e.to_string()))
}

pub fn write_pfm(path: impl AsRef<Path>, r: &Raster) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pfm(r)?).map_err(|e| Error::io(path, e))
}

pub fn read_pfm(path: impl AsRef<Path>) -> Result<Raster> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pfm(&bytes, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_row_order() {
        let r = Raster::from_vec(1, 2, 1, vec![1.0, 2.0]).unwrap();
        let b = encode_pfm(&r).unwrap();
        assert!(b.starts_with(b"Pf\n1 2\n-1.0\n"));
        let body = &b[b.len() - 8..];
        // bottom row first
        assert_eq!(&body[..4], &2.0f32.to_le_bytes());
        assert_eq!(decode_pfm(&b, Path::new("t.pfm")).unwrap(), r);
    }

    #[test]
    fn reads_big_endian() {
        let mut b = b"PF\n1 1\n1.0\n".to_vec();
        for v in [0.25f32, 0.5, 0.75] {
            b.extend_from_slice(&v.to_be_bytes());
        }
        let r = decode_pfm(&b, Path::new("be.pfm")).unwrap();
        assert_eq!(r.data(), &[0.25, 0.5, 0.75]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(encode_pfm(&Raster::zeros(2, 2, 2)).is_err());
        assert!(decode_pfm(b"P6\n1 1\n255\n", Path::new("x")).is_err());
        assert!(decode_pfm(b"Pf\n2 2\n-1.0\n\0\0\0\0", Path::new("x")).is_err());
        assert!(decode_pfm(b"Pf\nx 2\n-1.0\n", Path::new("x")).is_err());
    }
}
