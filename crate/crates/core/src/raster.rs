//! Dense float rasters, bilinear sampling and homography warping.

use crate::error::{Error, Result};
use crate::geometry::Homography;
use crate::par;

/// Coordinates this close outside the sampling domain are snapped back onto
/// its edge. Absorbs round-off in homographies that should be exact identities.
const EDGE_SNAP: f64 = 1e-6;

/// `width × height × channels` grid of `f32`, row-major and channel-interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
}

impl Raster {
    pub fn zeros(width: usize, height: usize, channels: usize) -> Self {
        Self::filled(width, height, channels, 0.0)
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f32) -> Self {
        assert!(value.is_finite(), "raster values must be finite");
        assert!(channels >= 1, "raster needs at least one channel");
        Raster {
            width,
            height,
            channels,
            data: vec![value; width * height * channels],
        }
    }

    pub fn from_vec(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if channels == 0 {
            return Err(Error::invalid("raster needs at least one channel"));
        }
        if data.len() != width * height * channels {
            return Err(Error::invalid(format!(
                "raster data has {} values, expected {width}x{height}x{channels} = {}",
                data.len(),
                width * height * channels
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "raster value at index {i} is not finite"
            )));
        }
        Ok(Raster {
            width,
            height,
            channels,
            data,
        })
    }

    /// Builds a raster from `f(x, y, channel)`. Panics on non-finite output.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Self {
        let mut r = Self::zeros(width, height, channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    r.set(x, y, c, f(x, y, c));
                }
            }
        }
        r
    }

    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn channels(&self) -> usize {
        self.channels
    }
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.channels)
    }
    pub fn data(&self) -> &[f32] {
        &self.data
    }
    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    fn offset(&self, x: usize, y: usize) -> usize {
        (y * self.width + x) * self.channels
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[f32] {
        let o = self.offset(x, y);
        &self.data[o..o + self.channels]
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[self.offset(x, y) + c]
    }

    pub fn set(&mut self, x: usize, y: usize, c: usize, value: f32) {
        assert!(value.is_finite(), "raster values must be finite");
        let o = self.offset(x, y);
        self.data[o + c] = value;
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, values: &[f32]) {
        assert_eq!(values.len(), self.channels);
        assert!(values.iter().all(|v| v.is_finite()));
        let o = self.offset(x, y);
        self.data[o..o + self.channels].copy_from_slice(values);
    }

    pub fn same_extent(&self, other: &Raster) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn min_max(&self) -> Option<(f32, f32)> {
        self.data.iter().fold(None, |acc, &v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }

    /// Per-pixel index of the largest channel; ties go to the lowest index.
    pub fn argmax(&self) -> LabelMap {
        let labels = self
            .data
            .chunks_exact(self.channels)
            .map(|px| {
                let mut best = 0;
                for (i, &v) in px.iter().enumerate().skip(1) {
                    if v > px[best] {
                        best = i;
                    }
                }
                best as u32
            })
            .collect();
        LabelMap {
            width: self.width,
            height: self.height,
            labels,
        }
    }
}

/// One integer label per pixel, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
}

impl LabelMap {
    pub fn filled(width: usize, height: usize, label: u32) -> Self {
        LabelMap {
            width,
            height,
            labels: vec![label; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::invalid(format!(
                "label map has {} entries, expected {width}x{height}",
                labels.len()
            )));
        }
        Ok(LabelMap {
            width,
            height,
            labels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }
    pub fn set(&mut self, x: usize, y: usize, label: u32) {
        self.labels[y * self.width + x] = label;
    }

    /// Each label as a one-hot distribution over `num_classes` channels.
    pub fn to_one_hot(&self, num_classes: usize) -> Result<Raster> {
        let mut r = Raster::zeros(self.width, self.height, num_classes);
        for y in 0..self.height {
            for x in 0..self.width {
                let l = self.get(x, y);
                if l as usize >= num_classes {
                    return Err(Error::LabelOutOfRange {
                        x,
                        y,
                        label: l,
                        num_classes,
                    });
                }
                r.set(x, y, l as usize, 1.0);
            }
        }
        Ok(r)
    }
}

/// What a sample outside the image reads as.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BorderPolicy {
    /// Zero in every channel, alpha included.
    #[default]
    Transparent,
    /// Coordinates are clamped to the nearest edge texel.
    Clamp,
}

/// Bilinear interpolation of the four texel centres around `(x, y)`.
pub fn bilinear_sample(img: &Raster, x: f64, y: f64, border: BorderPolicy) -> Vec<f32> {
    let mut out = vec![0.0; img.channels];
    sample_into(img, x, y, border, &mut out);
    out
}

/// Writes the bilinear sample at `(x, y)` into `out` (one value per channel).
#[inline]
pub(crate) fn sample_into(img: &Raster, x: f64, y: f64, border: BorderPolicy, out: &mut [f32]) {
    let max_x = img.width as f64 - 1.0;
    let max_y = img.height as f64 - 1.0;
    let inside = x >= -EDGE_SNAP && x <= max_x + EDGE_SNAP && y >= -EDGE_SNAP && y <= max_y + EDGE_SNAP;
    if img.width == 0 || img.height == 0 || (!inside && border == BorderPolicy::Transparent) || x.is_nan() || y.is_nan() {
        out.fill(0.0);
        return;
    }
    let x = x.clamp(0.0, max_x);
    let y = y.clamp(0.0, max_y);
    let x0 = (x.floor() as usize).min(img.width.saturating_sub(2));
    let y0 = (y.floor() as usize).min(img.height.saturating_sub(2));
    let x1 = (x0 + 1).min(img.width - 1);
    let y1 = (y0 + 1).min(img.height - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let (gx, gy) = (1.0 - fx, 1.0 - fy);

    let p00 = img.pixel(x0, y0);
    let p10 = img.pixel(x1, y0);
    let p01 = img.pixel(x0, y1);
    let p11 = img.pixel(x1, y1);
    for (c, o) in out.iter_mut().enumerate() {
        let top = p00[c] as f64 * gx + p10[c] as f64 * fx;
        let bottom = p01[c] as f64 * gx + p11[c] as f64 * fx;
        *o = (top * gy + bottom * fy) as f32;
    }
}

/// Inverse warp: output pixel `p` reads `img` at `h(p)`.
///
/// `h` must map output (target) pixels to input (reference) pixels. Pixels
/// whose homogeneous coordinate is not positive read as transparent.
pub fn warp(img: &Raster, h: &Homography, out_w: usize, out_h: usize, border: BorderPolicy) -> Raster {
    let channels = img.channels;
    let mut out = Raster::zeros(out_w, out_h, channels);
    par::for_each_row(out.data_mut(), out_w * channels, |v, row| {
        for (u, px) in row.chunks_exact_mut(channels).enumerate() {
            match h.apply(u as f64, v as f64) {
                Some((x, y)) => sample_into(img, x, y, border, px),
                None => px.fill(0.0),
            }
        }
    });
    out
}
