//! Front-to-back accumulation of plane contributions and novel-view rendering.
//!
//! Plane 0 is the nearest. Plane `z` contributes with weight
//! `α_z · ∏_{j<z} (1 - α_j)`; whatever is left after the last plane is the
//! residual transmittance, so weights and transmittance sum to one.

use crate::error::{Error, Result};
use crate::geometry::{homography_tgt_to_ref, CameraIntrinsics, Homography, Pose};
use crate::mpi::scene::{check_alpha_stack, ChannelKind, MpiScene};
use crate::par;
use crate::raster::{sample_into, BorderPolicy, LabelMap, Raster};

/// Coverage below this is treated as empty when normalising.
pub const MIN_COVERAGE: f64 = 1e-6;

/// Running front-to-back sum for one pixel.
#[derive(Debug, Clone)]
pub(crate) struct Accumulator {
    sum: Vec<f64>,
    transmittance: f64,
}

impl Accumulator {
    pub(crate) fn new(channels: usize) -> Self {
        Accumulator {
            sum: vec![0.0; channels],
            transmittance: 1.0,
        }
    }

    #[inline]
    pub(crate) fn reset(&mut self) {
        self.sum.fill(0.0);
        self.transmittance = 1.0;
    }

    #[inline]
    pub(crate) fn push(&mut self, content: &[f32], alpha: f32) {
        let a = alpha as f64;
        let w = a * self.transmittance;
        for (s, c) in self.sum.iter_mut().zip(content) {
            *s += w * *c as f64;
        }
        self.transmittance *= 1.0 - a;
    }

    #[inline]
    pub(crate) fn push_scalar(&mut self, value: f64, alpha: f32) {
        let a = alpha as f64;
        self.sum[0] += a * self.transmittance * value;
        self.transmittance *= 1.0 - a;
    }

    #[inline]
    pub(crate) fn write(&self, image: &mut [f32]) -> f32 {
        for (d, s) in image.iter_mut().zip(&self.sum) {
            *d = *s as f32;
        }
        self.transmittance as f32
    }

    pub(crate) fn sum(&self) -> &[f64] {
        &self.sum
    }

    pub(crate) fn transmittance(&self) -> f64 {
        self.transmittance
    }
}

/// Composited content plus the light that passed through every plane.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeOutput {
    pub image: Raster,
    pub transmittance: Raster,
}

impl CompositeOutput {
    /// Image divided by coverage `1 - T`; pixels with coverage at most
    /// [`MIN_COVERAGE`] become zero.
    pub fn normalized(&self) -> Raster {
        let c = self.image.channels();
        let mut out = self.image.clone();
        for (px, t) in out.data_mut().chunks_exact_mut(c).zip(self.transmittance.data()) {
            let coverage = 1.0 - *t as f64;
            if coverage > MIN_COVERAGE {
                px.iter_mut().for_each(|v| *v = (*v as f64 / coverage) as f32);
            } else {
                px.fill(0.0);
            }
        }
        out
    }
}

/// Over-composites `content` with `alpha`, index 0 frontmost.
pub fn composite(content: &[Raster], alpha: &[Raster]) -> Result<CompositeOutput> {
    let first = content
        .first()
        .ok_or_else(|| Error::invalid("cannot composite an empty plane list"))?;
    if alpha.len() != content.len() {
        return Err(Error::invalid(format!(
            "{} content layers but {} alpha layers",
            content.len(),
            alpha.len()
        )));
    }
    let (w, h, c) = first.dims();
    if let Some(i) = content.iter().position(|r| r.dims() != (w, h, c)) {
        return Err(Error::invalid(format!(
            "content layer {i} is {:?}, expected {:?}",
            content[i].dims(),
            (w, h, c)
        )));
    }
    check_alpha_stack(alpha, w, h)?;

    let mut image = Raster::zeros(w, h, c);
    let mut transmittance = Raster::zeros(w, h, 1);
    par::for_each_row_pair(image.data_mut(), w * c, transmittance.data_mut(), w, |y, row, t_row| {
        let mut acc = Accumulator::new(c);
        for (x, (px, t)) in row.chunks_exact_mut(c).zip(t_row.iter_mut()).enumerate() {
            acc.reset();
            for (layer, a) in content.iter().zip(alpha) {
                acc.push(layer.pixel(x, y), a.get(x, y, 0));
            }
            *t = acc.write(px);
        }
    });
    Ok(CompositeOutput {
        image,
        transmittance,
    })
}

/// One homography per plane, target pixels to reference pixels.
pub fn plane_homographies(
    scene: &MpiScene,
    k_tgt: &CameraIntrinsics,
    theta: &Pose,
) -> Result<Vec<Homography>> {
    scene
        .planes()
        .iter()
        .enumerate()
        .map(|(i, plane)| {
            homography_tgt_to_ref(plane, scene.intrinsics(), k_tgt, theta).map_err(|e| match e {
                Error::DegenerateHomography { denominator, .. } => Error::DegenerateHomography {
                    plane: Some(i),
                    denominator,
                },
                other => other,
            })
        })
        .collect()
}

/// Warps every plane into the target camera and composites the result.
///
/// Equivalent to warping each content and alpha raster with its plane
/// homography and passing them to [`composite`], without materialising the
/// warped stacks.
pub fn render_view(
    scene: &MpiScene,
    k_tgt: &CameraIntrinsics,
    theta: &Pose,
    border: BorderPolicy,
) -> Result<CompositeOutput> {
    let hs = plane_homographies(scene, k_tgt, theta)?;
    let (w, h) = (k_tgt.width(), k_tgt.height());
    let c = scene.channels();

    let mut image = Raster::zeros(w, h, c);
    let mut transmittance = Raster::zeros(w, h, 1);
    par::for_each_row_pair(image.data_mut(), w * c, transmittance.data_mut(), w, |v, img_row, t_row| {
        let mut acc = Accumulator::new(c);
        let mut sample = vec![0.0f32; c];
        let mut a = [0.0f32];
        for (u, (px, t)) in img_row.chunks_exact_mut(c).zip(t_row.iter_mut()).enumerate() {
            acc.reset();
            for ((hom, content), alpha) in hs.iter().zip(scene.content()).zip(scene.alpha()) {
                match hom.apply(u as f64, v as f64) {
                    Some((x, y)) => {
                        sample_into(alpha, x, y, border, &mut a);
                        sample_into(content, x, y, border, &mut sample);
                    }
                    None => {
                        a[0] = 0.0;
                        sample.fill(0.0);
                    }
                }
                acc.push(&sample, a[0]);
            }
            *t = acc.write(px);
        }
    });

    Ok(CompositeOutput {
        image,
        transmittance,
    })
}

/// Rendered class probabilities and their per-pixel argmax.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticRender {
    pub labels: LabelMap,
    pub probabilities: Raster,
    pub transmittance: Raster,
}

/// Renders a semantics scene and labels each pixel with its most probable
/// class, ties going to the lowest class index.
pub fn render_semantics(
    scene: &MpiScene,
    k_tgt: &CameraIntrinsics,
    theta: &Pose,
) -> Result<SemanticRender> {
    if scene.kind() != ChannelKind::Semantics {
        return Err(Error::invalid(format!(
            "render_semantics needs a semantics scene, got {:?}",
            scene.kind()
        )));
    }
    let out = render_view(scene, k_tgt, theta, BorderPolicy::Transparent)?;
    Ok(SemanticRender {
        labels: out.image.argmax(),
        probabilities: out.image,
        transmittance: out.transmittance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn opaque_single_plane() {
        let c = Raster::from_fn(3, 2, 3, |x, y, ch| (x + y + ch) as f32 * 0.1);
        let out = composite(&[c.clone()], &[Raster::filled(3, 2, 1, 1.0)]).unwrap();
        assert_eq!(out.image, c);
        assert!(out.transmittance.data().iter().all(|t| *t == 0.0));
    }

    #[test]
    fn opaque_front_hides_back() {
        let front = Raster::filled(2, 2, 1, 0.25);
        let a_front = Raster::filled(2, 2, 1, 1.0);
        for back_value in [0.0, 0.9, 123.0] {
            let back = Raster::filled(2, 2, 1, back_value);
            let a_back = Raster::filled(2, 2, 1, 0.6);
            let out = composite(&[front.clone(), back], &[a_front.clone(), a_back]).unwrap();
            assert!(out.image.data().iter().all(|v| *v == 0.25));
        }
    }

    #[test]
    fn hand_case_two_planes() {
        let a = [Raster::filled(1, 1, 1, 0.5), Raster::filled(1, 1, 1, 1.0)];
        let c = [Raster::filled(1, 1, 1, 2.0), Raster::filled(1, 1, 1, 10.0)];
        let out = composite(&c, &a).unwrap();
        assert_eq!(out.image.data(), &[6.0]);
        assert_eq!(out.transmittance.data(), &[0.0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(composite(&[], &[]).is_err());
        let c = [Raster::zeros(2, 2, 1), Raster::zeros(3, 2, 1)];
        let a = [Raster::zeros(2, 2, 1), Raster::zeros(2, 2, 1)];
        assert!(composite(&c, &a).is_err());
        let c = [Raster::zeros(2, 2, 1)];
        assert!(composite(&c, &[Raster::filled(2, 2, 1, 1.5)]).is_err());
        assert!(composite(&c, &a).is_err());
    }

    #[test]
    fn normalized_divides_by_coverage() {
        let out = composite(&[Raster::filled(1, 1, 2, 0.8)], &[Raster::filled(1, 1, 1, 0.5)]).unwrap();
        assert_eq!(out.image.data(), &[0.4, 0.4]);
        assert_eq!(out.normalized().data(), &[0.8, 0.8]);
        let empty = composite(&[Raster::filled(1, 1, 1, 0.8)], &[Raster::zeros(1, 1, 1)]).unwrap();
        assert_eq!(empty.normalized().data(), &[0.0]);
    }
}
