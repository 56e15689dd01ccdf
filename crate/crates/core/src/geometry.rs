//! Pinhole cameras, rigid poses, MPI planes and plane-induced homographies.
//!
//! Conventions: x right, y down, z forward. Pixel `(u, v)` is the homogeneous
//! vector `[u, v, 1]` and the centre of texel `(i, j)` sits at `(i, j)`.
//! A [`Pose`] maps reference-camera coordinates to target-camera coordinates,
//! `X_t = R X_r + t`. A [`Plane`] is the set `nᵀX = d` in the reference frame
//! with `d > 0`.

use nalgebra::{Matrix3, Matrix4, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ORTHONORMAL_TOL: f64 = 1e-9;
const UNIT_NORMAL_TOL: f64 = 1e-9;
const DENOMINATOR_EPS: f64 = 1e-12;
const HOMOGRAPHY_DET_EPS: f64 = 1e-12;
const MIN_DEPTH: f64 = 1e-9;

/// Pinhole intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IntrinsicsRepr", into = "IntrinsicsRepr")]
pub struct CameraIntrinsics {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: usize,
    height: usize,
}

#[derive(Serialize, Deserialize)]
struct IntrinsicsRepr {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: usize,
    height: usize,
}

impl TryFrom<IntrinsicsRepr> for CameraIntrinsics {
    type Error = Error;
    fn try_from(r: IntrinsicsRepr) -> Result<Self> {
        CameraIntrinsics::new(r.fx, r.fy, r.cx, r.cy, r.width, r.height)
    }
}

impl From<CameraIntrinsics> for IntrinsicsRepr {
    fn from(k: CameraIntrinsics) -> Self {
        IntrinsicsRepr {
            fx: k.fx,
            fy: k.fy,
            cx: k.cx,
            cy: k.cy,
            width: k.width,
            height: k.height,
        }
    }
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self> {
        if !(fx.is_finite() && fx > 0.0 && fy.is_finite() && fy > 0.0) {
            return Err(Error::invalid(format!(
                "focal lengths must be positive, got fx={fx}, fy={fy}"
            )));
        }
        if !(cx.is_finite() && cy.is_finite()) {
            return Err(Error::invalid("principal point must be finite"));
        }
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!(
                "image size must be at least 1x1, got {width}x{height}"
            )));
        }
        Ok(CameraIntrinsics {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        })
    }

    /// Square pixels with the principal point at the image centre.
    pub fn centered(focal: f64, width: usize, height: usize) -> Result<Self> {
        let cx = (width as f64 - 1.0) / 2.0;
        let cy = (height as f64 - 1.0) / 2.0;
        Self::new(focal, focal, cx, cy, width, height)
    }

    pub fn fx(&self) -> f64 {
        self.fx
    }
    pub fn fy(&self) -> f64 {
        self.fy
    }
    pub fn cx(&self) -> f64 {
        self.cx
    }
    pub fn cy(&self) -> f64 {
        self.cy
    }
    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.fx, 0.0, self.cx, //
            0.0, self.fy, self.cy, //
            0.0, 0.0, 1.0,
        )
    }

    /// Closed-form inverse of [`matrix`](Self::matrix).
    pub fn inverse_matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            1.0 / self.fx,
            0.0,
            -self.cx / self.fx,
            0.0,
            1.0 / self.fy,
            -self.cy / self.fy,
            0.0,
            0.0,
            1.0,
        )
    }
}

/// Rigid transform from the reference camera frame to the target camera frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PoseRepr", into = "PoseRepr")]
pub struct Pose {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

/// Row-major rotation rows plus translation, as stored in JSON.
#[derive(Serialize, Deserialize)]
struct PoseRepr {
    rotation: [[f64; 3]; 3],
    translation: [f64; 3],
}

impl TryFrom<PoseRepr> for Pose {
    type Error = Error;
    fn try_from(r: PoseRepr) -> Result<Self> {
        let rot = Matrix3::from_fn(|i, j| r.rotation[i][j]);
        Pose::new(rot, Vector3::from(r.translation))
    }
}

impl From<Pose> for PoseRepr {
    fn from(p: Pose) -> Self {
        let m = p.rotation;
        PoseRepr {
            rotation: [
                [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
                [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
                [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
            ],
            translation: [p.translation.x, p.translation.y, p.translation.z],
        }
    }
}

impl Pose {
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        if !rotation.iter().chain(translation.iter()).all(|v| v.is_finite()) {
            return Err(Error::invalid("pose contains non-finite values"));
        }
        let gram_err = (rotation.transpose() * rotation - Matrix3::identity()).amax();
        if gram_err > ORTHONORMAL_TOL {
            return Err(Error::invalid(format!(
                "rotation is not orthonormal (max |RᵀR - I| = {gram_err:e})"
            )));
        }
        let det = rotation.determinant();
        if (det - 1.0).abs() > ORTHONORMAL_TOL {
            return Err(Error::invalid(format!(
                "rotation determinant must be +1, got {det}"
            )));
        }
        Ok(Pose {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Pose {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn from_translation(t: Vector3<f64>) -> Self {
        Pose {
            rotation: Matrix3::identity(),
            translation: t,
        }
    }

    /// Target camera displaced `offset` metres along +x of the reference camera.
    pub fn lateral(offset: f64) -> Self {
        Self::from_translation(Vector3::new(-offset, 0.0, 0.0))
    }

    /// Target camera displaced `offset` metres along the reference optical axis.
    pub fn forward(offset: f64) -> Self {
        Self::from_translation(Vector3::new(0.0, 0.0, -offset))
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn transform_point(&self, x: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * x + self.translation
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.transpose();
        Pose {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }
}

pub fn invert_pose(p: &Pose) -> Pose {
    p.inverse()
}

pub fn compose_pose(a: &Pose, b: &Pose) -> Pose {
    a.compose(b)
}

/// One MPI plane `nᵀX = d` in the reference camera frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlaneRepr", into = "PlaneRepr")]
pub struct Plane {
    normal: Vector3<f64>,
    distance: f64,
}

#[derive(Serialize, Deserialize)]
struct PlaneRepr {
    normal: [f64; 3],
    distance: f64,
}

impl TryFrom<PlaneRepr> for Plane {
    type Error = Error;
    fn try_from(r: PlaneRepr) -> Result<Self> {
        Plane::new(Vector3::from(r.normal), r.distance)
    }
}

impl From<Plane> for PlaneRepr {
    fn from(p: Plane) -> Self {
        PlaneRepr {
            normal: [p.normal.x, p.normal.y, p.normal.z],
            distance: p.distance,
        }
    }
}

impl Plane {
    pub fn new(normal: Vector3<f64>, distance: f64) -> Result<Self> {
        if !normal.iter().all(|v| v.is_finite()) || !distance.is_finite() {
            return Err(Error::invalid("plane contains non-finite values"));
        }
        if (normal.norm() - 1.0).abs() > UNIT_NORMAL_TOL {
            return Err(Error::invalid(format!(
                "plane normal must be unit length, got norm {}",
                normal.norm()
            )));
        }
        if distance <= 0.0 {
            return Err(Error::invalid(format!(
                "plane distance must be positive, got {distance}"
            )));
        }
        Ok(Plane { normal, distance })
    }

    pub fn fronto_parallel(distance: f64) -> Result<Self> {
        Self::new(Vector3::z(), distance)
    }

    pub fn normal(&self) -> &Vector3<f64> {
        &self.normal
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn is_fronto_parallel(&self) -> bool {
        (self.normal - Vector3::z()).amax() <= UNIT_NORMAL_TOL
    }

    /// The same plane expressed in the frame that `pose` maps into.
    pub fn transformed(&self, pose: &Pose) -> Result<Plane> {
        let n = pose.rotation() * self.normal;
        Plane::new(n, self.distance + n.dot(pose.translation()))
    }
}

/// `m` fronto-parallel planes whose inverse distances are evenly spaced from
/// `1/d_near` to `1/d_far`, nearest first.
pub fn plane_set(d_near: f64, d_far: f64, m: usize) -> Result<Vec<Plane>> {
    if m < 2 {
        return Err(Error::invalid(format!("need at least 2 planes, got {m}")));
    }
    if !(d_near.is_finite() && d_far.is_finite() && d_near > 0.0 && d_near < d_far) {
        return Err(Error::invalid(format!(
            "plane range must satisfy 0 < near < far, got [{d_near}, {d_far}]"
        )));
    }
    let inv_near = 1.0 / d_near;
    let inv_far = 1.0 / d_far;
    let last = (m - 1) as f64;
    (0..m)
        .map(|i| {
            let d = if i == 0 {
                d_near
            } else if i == m - 1 {
                d_far
            } else {
                1.0 / (inv_near + (inv_far - inv_near) * (i as f64 / last))
            };
            Plane::fronto_parallel(d)
        })
        .collect()
}

/// Projective map between pixel coordinates, defined up to positive scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    matrix: Matrix3<f64>,
}

impl Homography {
    pub fn from_matrix(matrix: Matrix3<f64>) -> Result<Self> {
        if !matrix.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("homography contains non-finite values"));
        }
        let norm = matrix.norm();
        if norm == 0.0 || (matrix / norm).determinant().abs() <= HOMOGRAPHY_DET_EPS {
            return Err(Error::invalid("homography is singular"));
        }
        Ok(Homography { matrix })
    }

    pub fn identity() -> Self {
        Homography {
            matrix: Matrix3::identity(),
        }
    }

    /// Integer or sub-pixel translation `(u, v) -> (u + du, v + dv)`.
    pub fn translation(du: f64, dv: f64) -> Self {
        Homography {
            matrix: Matrix3::new(1.0, 0.0, du, 0.0, 1.0, dv, 0.0, 0.0, 1.0),
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }

    pub fn inverse(&self) -> Homography {
        let inv = self
            .matrix
            .try_inverse()
            .expect("validated homography is invertible");
        Homography { matrix: inv }
    }

    pub fn scaled(&self, s: f64) -> Result<Homography> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::invalid(format!("scale must be positive, got {s}")));
        }
        Ok(Homography {
            matrix: self.matrix * s,
        })
    }

    /// Maps a pixel. `None` when the homogeneous coordinate is not safely
    /// positive, i.e. the ray meets the plane at or behind a camera.
    #[inline]
    pub fn apply(&self, u: f64, v: f64) -> Option<(f64, f64)> {
        let m = &self.matrix;
        let w = m[(2, 0)] * u + m[(2, 1)] * v + m[(2, 2)];
        if w < DENOMINATOR_EPS {
            return None;
        }
        let x = m[(0, 0)] * u + m[(0, 1)] * v + m[(0, 2)];
        let y = m[(1, 0)] * u + m[(1, 1)] * v + m[(1, 2)];
        Some((x / w, y / w))
    }
}

/// `-d - nᵀRᵀt`; zero exactly when the target camera centre lies on the plane.
fn plane_denominator(plane: &Plane, theta: &Pose) -> Result<f64> {
    let rt = theta.rotation().transpose();
    let denom = -plane.distance() - plane.normal().dot(&(rt * theta.translation()));
    if denom.abs() <= DENOMINATOR_EPS {
        return Err(Error::DegenerateHomography {
            plane: None,
            denominator: denom,
        });
    }
    Ok(denom)
}

/// Plane-induced homography taking target pixels to reference pixels,
/// the map inverse warping needs:
///
/// `H = K_r [Rᵀ + Rᵀ t nᵀ Rᵀ / (-d - nᵀ Rᵀ t)] K_t⁻¹`.
///
/// The bracket is `(R + t nᵀ / d)⁻¹`, so the reference intrinsics sit on the
/// left. With `K_t = K_r` this is the usual textbook form.
pub fn homography_tgt_to_ref(
    plane: &Plane,
    k_ref: &CameraIntrinsics,
    k_tgt: &CameraIntrinsics,
    theta: &Pose,
) -> Result<Homography> {
    let denom = plane_denominator(plane, theta)?;
    let rt = theta.rotation().transpose();
    let n = plane.normal();
    let bracket = rt + (rt * theta.translation() * n.transpose() * rt) / denom;
    Homography::from_matrix(k_ref.matrix() * bracket * k_tgt.inverse_matrix())
}

/// Plane-induced homography taking reference pixels to target pixels,
/// `H = K_t (R + t nᵀ / d) K_r⁻¹`. Inverse of [`homography_tgt_to_ref`].
pub fn homography_ref_to_tgt(
    plane: &Plane,
    k_ref: &CameraIntrinsics,
    k_tgt: &CameraIntrinsics,
    theta: &Pose,
) -> Result<Homography> {
    plane_denominator(plane, theta)?;
    let m = theta.rotation() + theta.translation() * plane.normal().transpose() / plane.distance();
    Homography::from_matrix(k_tgt.matrix() * m * k_ref.inverse_matrix())
}

/// Standard pinhole projection of `pose * x`.
pub fn project_point(k: &CameraIntrinsics, pose: &Pose, x: &Vector3<f64>) -> Result<(f64, f64)> {
    let p = pose.transform_point(x);
    if p.z <= MIN_DEPTH {
        return Err(Error::BehindCamera { z: p.z });
    }
    Ok((k.fx * p.x / p.z + k.cx, k.fy * p.y / p.z + k.cy))
}
