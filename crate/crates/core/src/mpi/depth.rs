//! Depth maps recovered from the plane transparencies alone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Plane;
use crate::mpi::composite::{Accumulator, MIN_COVERAGE};
use crate::mpi::scene::check_alpha_stack;
use crate::par;
use crate::raster::Raster;

/// Stereo baseline, in metres, used to turn depth into disparity.
pub const DEFAULT_BASELINE: f64 = 0.54;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepthMode {
    /// Plain weighted sum; transparent pixels pull towards zero.
    #[default]
    Raw,
    /// Weighted sum divided by coverage; empty pixels read as the far plane.
    Normalized,
}

/// Composites the plane distances `d_i` with the alpha stack.
pub fn depth_from_alpha(alpha: &[Raster], planes: &[Plane], mode: DepthMode) -> Result<Raster> {
    let values: Vec<f64> = planes.iter().map(Plane::distance).collect();
    composite_plane_values(alpha, planes, &values, mode)
}

/// Composites the plane inverse distances `1/d_i` with the alpha stack.
pub fn inverse_depth_from_alpha(alpha: &[Raster], planes: &[Plane], mode: DepthMode) -> Result<Raster> {
    let values: Vec<f64> = planes.iter().map(|p| 1.0 / p.distance()).collect();
    composite_plane_values(alpha, planes, &values, mode)
}

fn composite_plane_values(
    alpha: &[Raster],
    planes: &[Plane],
    values: &[f64],
    mode: DepthMode,
) -> Result<Raster> {
    let first = alpha
        .first()
        .ok_or_else(|| Error::invalid("depth needs at least one plane"))?;
    if alpha.len() != planes.len() {
        return Err(Error::invalid(format!(
            "{} alpha layers but {} planes",
            alpha.len(),
            planes.len()
        )));
    }
    if let Some(i) = planes.iter().position(|p| !p.is_fronto_parallel()) {
        return Err(Error::invalid(format!(
            "depth from alpha needs fronto-parallel planes; plane {i} is tilted"
        )));
    }
    let (w, h) = (first.width(), first.height());
    check_alpha_stack(alpha, w, h)?;
    let fallback = *values.last().unwrap();

    let mut out = Raster::zeros(w, h, 1);
    par::for_each_row(out.data_mut(), w, |y, row| {
        let mut acc = Accumulator::new(1);
        for (x, o) in row.iter_mut().enumerate() {
            acc.reset();
            for (a, v) in alpha.iter().zip(values) {
                acc.push_scalar(*v, a.get(x, y, 0));
            }
            let raw = acc.sum()[0];
            *o = match mode {
                DepthMode::Raw => raw as f32,
                DepthMode::Normalized => {
                    let coverage = 1.0 - acc.transmittance();
                    if coverage > MIN_COVERAGE {
                        (raw / coverage) as f32
                    } else {
                        fallback as f32
                    }
                }
            };
        }
    });
    Ok(out)
}

/// What a raster handed to [`depth_to_disparity`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthInput {
    Depth,
    InverseDepth,
}

/// `disparity = fx · baseline / depth`.
pub fn depth_to_disparity(map: &Raster, fx: f64, baseline: f64, input: DepthInput) -> Result<Raster> {
    if map.channels() != 1 {
        return Err(Error::invalid(format!(
            "depth map must have one channel, got {}",
            map.channels()
        )));
    }
    if !(fx.is_finite() && fx > 0.0 && baseline.is_finite() && baseline > 0.0) {
        return Err(Error::invalid(format!(
            "fx and baseline must be positive, got fx={fx}, baseline={baseline}"
        )));
    }
    let scale = fx * baseline;
    let data: Vec<f32> = match input {
        DepthInput::InverseDepth => map.data().iter().map(|v| (scale * *v as f64) as f32).collect(),
        DepthInput::Depth => {
            let bad = map.data().iter().filter(|v| **v <= 0.0).count();
            if bad > 0 {
                return Err(Error::NonPositiveDepth { count: bad });
            }
            map.data().iter().map(|v| (scale / *v as f64) as f32).collect()
        }
    };
    Raster::from_vec(map.width(), map.height(), 1, data)
}
