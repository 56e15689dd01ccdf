//! 8-bit PNG output for label maps and previews.

use std::fs::File;
use std::io::{BufReader, BufWriter, Cursor};
use std::path::Path;

use png::{BitDepth, ColorType};

use crate::error::{Error, Result};
use crate::raster::{LabelMap, Raster};

/// Label value written for pixels excluded from evaluation.
pub const IGNORE_LABEL_BYTE: u8 = 255;

/// Linear value to byte: clamp to [0, 1], scale by 255, round half up.
pub fn quantize(v: f32) -> u8 {
    ((v.clamp(0.0, 1.0) as f64) * 255.0 + 0.5).floor() as u8
}

/// RGB colour for a label index: a fixed street-scene palette for the first
/// entries, hashed colours after that.
pub fn label_color(label: u32) -> [u8; 3] {
    const BASE: [[u8; 3]; 20] = [
        [128, 64, 128],
        [244, 35, 232],
        [70, 70, 70],
        [102, 102, 156],
        [190, 153, 153],
        [153, 153, 153],
        [250, 170, 30],
        [220, 220, 0],
        [107, 142, 35],
        [152, 251, 152],
        [70, 130, 180],
        [220, 20, 60],
        [255, 0, 0],
        [0, 0, 142],
        [0, 0, 70],
        [0, 60, 100],
        [0, 80, 100],
        [0, 0, 230],
        [119, 11, 32],
        [0, 0, 0],
    ];
    if let Some(c) = BASE.get(label as usize) {
        return *c;
    }
    if label == IGNORE_LABEL_BYTE as u32 {
        return [0, 0, 0];
    }
    let h = label.wrapping_mul(2_654_435_761);
    [(h >> 24) as u8, (h >> 16) as u8, (h >> 8) as u8]
}

fn encode(w: usize, h: usize, color: ColorType, palette: Option<Vec<u8>>, data: &[u8]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, w as u32, h as u32);
        enc.set_color(color);
        enc.set_depth(BitDepth::Eight);
        if let Some(p) = palette {
            enc.set_palette(p);
        }
        let mut writer = enc
            .write_header()
            .map_err(|e| Error::invalid(format!("png encode: {e}")))?;
        writer
            .write_image_data(data)
            .map_err(|e| Error::invalid(format!("png encode: {e}")))?;
    }
    Ok(out)
}

/// Indexed PNG: pixel byte = label, palette from [`label_color`].
pub fn encode_label_png(labels: &LabelMap) -> Result<Vec<u8>> {
    let mut bytes = Vec::with_capacity(labels.labels().len());
    for (i, &l) in labels.labels().iter().enumerate() {
        if l > 255 {
            return Err(Error::LabelOutOfRange {
                x: i % labels.width(),
                y: i / labels.width(),
                label: l,
                num_classes: 256,
            });
        }
        bytes.push(l as u8);
    }
    let palette: Vec<u8> = (0..256u32).flat_map(label_color).collect();
    encode(labels.width(), labels.height(), ColorType::Indexed, Some(palette), &bytes)
}

/// Reads one 8-bit label per pixel from an indexed or grayscale PNG.
pub fn decode_label_png(bytes: &[u8], path: &Path) -> Result<LabelMap> {
    let (w, h, color, data) = decode(bytes, path)?;
    if !matches!(color, ColorType::Indexed | ColorType::Grayscale) {
        return Err(Error::format(
            path,
            format!("label PNG must be indexed or grayscale, got {color:?}"),
        ));
    }
    LabelMap::from_vec(w, h, data.into_iter().map(u32::from).collect())
        .map_err(|e| Error::format(path, e.to_string()))
}

/// Grayscale (1 channel) or RGB (3 channels) preview, see [`quantize`].
pub fn encode_preview_png(r: &Raster) -> Result<Vec<u8>> {
    let color = match r.channels() {
        1 => ColorType::Grayscale,
        3 => ColorType::Rgb,
        c => {
            return Err(Error::invalid(format!(
                "preview needs 1 or 3 channels, raster has {c}"
            )))
        }
    };
    let bytes: Vec<u8> = r.data().iter().map(|v| quantize(*v)).collect();
    encode(r.width(), r.height(), color, None, &bytes)
}

fn decode(bytes: &[u8], path: &Path) -> Result<(usize, usize, ColorType, Vec<u8>)> {
    let decoder = png::Decoder::new(Cursor::new(bytes));
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::format(path, format!("png decode: {e}")))?;
    let info = reader.info();
    if info.bit_depth != BitDepth::Eight {
        return Err(Error::format(
            path,
            format!("unsupported PNG bit depth {:?}", info.bit_depth),
        ));
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::format(path, "png too large"))?;
    let mut buf = vec![0u8; size];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::format(path, format!("png decode: {e}")))?;
    buf.truncate(frame.buffer_size());
    Ok((frame.width as usize, frame.height as usize, frame.color_type, buf))
}

/// Preview PNG decoded back to linear `[0, 1]` floats (1 or 3 channels).
pub fn decode_preview_png(bytes: &[u8], path: &Path) -> Result<Raster> {
    let (w, h, color, data) = decode(bytes, path)?;
    let channels = match color {
        ColorType::Grayscale => 1,
        ColorType::Rgb => 3,
        other => {
            return Err(Error::format(
                path,
                format!("preview PNG must be grayscale or RGB, got {other:?}"),
            ))
        }
    };
    Raster::from_vec(w, h, channels, data.iter().map(|b| *b as f32 / 255.0).collect())
        .map_err(|e| Error::format(path, e.to_string()))
}

pub fn write_label_png(path: impl AsRef<Path>, labels: &LabelMap) -> Result<()> {
    write_bytes(path.as_ref(), &encode_label_png(labels)?)
}

pub fn read_label_png(path: impl AsRef<Path>) -> Result<LabelMap> {
    let path = path.as_ref();
    decode_label_png(&read_bytes(path)?, path)
}

pub fn write_preview_png(path: impl AsRef<Path>, r: &Raster) -> Result<()> {
    write_bytes(path.as_ref(), &encode_preview_png(r)?)
}

pub fn read_preview_png(path: impl AsRef<Path>) -> Result<Raster> {
    let path = path.as_ref();
    decode_preview_png(&read_bytes(path)?, path)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    w.write_all(bytes).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    use std::io::Read;
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut buf = Vec::new();
    BufReader::new(f).read_to_end(&mut buf).map_err(|e| Error::io(path, e))?;
    Ok(buf)
}
