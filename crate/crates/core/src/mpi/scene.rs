use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, Plane};
use crate::par;
use crate::raster::Raster;

const SIMPLEX_TOL: f32 = 1e-4;
/// Association columns summing to at most this are treated as empty.
pub const DEGENERATE_COLUMN_SUM: f64 = 1e-8;

/// What the content channels of a scene hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Color,
    Semantics,
    Features,
}

/// A full multi-plane image: one content raster and one alpha raster per plane,
/// nearest plane first.
#[derive(Debug, Clone, PartialEq)]
pub struct MpiScene {
    planes: Vec<Plane>,
    content: Vec<Raster>,
    alpha: Vec<Raster>,
    intrinsics: CameraIntrinsics,
    kind: ChannelKind,
}

impl MpiScene {
    pub fn new(
        planes: Vec<Plane>,
        content: Vec<Raster>,
        alpha: Vec<Raster>,
        intrinsics: CameraIntrinsics,
        kind: ChannelKind,
    ) -> Result<Self> {
        let m = planes.len();
        if m == 0 {
            return Err(Error::invalid("scene needs at least one plane"));
        }
        if content.len() != m || alpha.len() != m {
            return Err(Error::invalid(format!(
                "scene has {m} planes but {} content and {} alpha layers",
                content.len(),
                alpha.len()
            )));
        }
        check_planes_ordered(&planes)?;
        let (w, h) = (intrinsics.width(), intrinsics.height());
        let channels = content[0].channels();
        for (i, c) in content.iter().enumerate() {
            if c.width() != w || c.height() != h || c.channels() != channels {
                return Err(Error::invalid(format!(
                    "content layer {i} is {:?}, expected {w}x{h}x{channels}",
                    c.dims()
                )));
            }
        }
        check_kind_channels(kind, channels)?;
        check_alpha_stack(&alpha, w, h)?;
        if kind == ChannelKind::Semantics {
            for (i, c) in content.iter().enumerate() {
                check_simplex(c).map_err(|e| Error::invalid(format!("content layer {i}: {e}")))?;
            }
        }
        Ok(MpiScene {
            planes,
            content,
            alpha,
            intrinsics,
            kind,
        })
    }

    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }
    pub fn content(&self) -> &[Raster] {
        &self.content
    }
    pub fn alpha(&self) -> &[Raster] {
        &self.alpha
    }
    pub fn intrinsics(&self) -> &CameraIntrinsics {
        &self.intrinsics
    }
    pub fn kind(&self) -> ChannelKind {
        self.kind
    }
    pub fn num_planes(&self) -> usize {
        self.planes.len()
    }
    pub fn channels(&self) -> usize {
        self.content[0].channels()
    }
}

/// Compact layered scene: `k` lifted content layers distributed onto `m`
/// planes by a per-pixel association tensor.
///
/// `assoc` has `k·m` channels; channel `j·m + i` is the affinity of lifted
/// layer `j` to plane `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridScene {
    lifted: Vec<Raster>,
    alpha: Vec<Raster>,
    assoc: Raster,
    planes: Vec<Plane>,
    intrinsics: CameraIntrinsics,
    kind: ChannelKind,
}

impl HybridScene {
    pub fn new(
        lifted: Vec<Raster>,
        alpha: Vec<Raster>,
        assoc: Raster,
        planes: Vec<Plane>,
        intrinsics: CameraIntrinsics,
        kind: ChannelKind,
    ) -> Result<Self> {
        let k = lifted.len();
        let m = planes.len();
        if k == 0 || m == 0 {
            return Err(Error::invalid("hybrid scene needs lifted layers and planes"));
        }
        if k > m {
            return Err(Error::invalid(format!(
                "lifted layer count {k} exceeds plane count {m}"
            )));
        }
        if alpha.len() != m {
            return Err(Error::invalid(format!(
                "hybrid scene has {m} planes but {} alpha layers",
                alpha.len()
            )));
        }
        check_planes_ordered(&planes)?;
        let (w, h) = (intrinsics.width(), intrinsics.height());
        let channels = lifted[0].channels();
        for (j, l) in lifted.iter().enumerate() {
            if l.width() != w || l.height() != h || l.channels() != channels {
                return Err(Error::invalid(format!(
                    "lifted layer {j} is {:?}, expected {w}x{h}x{channels}",
                    l.dims()
                )));
            }
        }
        check_kind_channels(kind, channels)?;
        check_alpha_stack(&alpha, w, h)?;
        if assoc.width() != w || assoc.height() != h || assoc.channels() != k * m {
            return Err(Error::invalid(format!(
                "association tensor is {:?}, expected {w}x{h}x{}",
                assoc.dims(),
                k * m
            )));
        }
        check_non_negative(&assoc)?;
        if kind == ChannelKind::Semantics {
            for (j, l) in lifted.iter().enumerate() {
                check_simplex(l).map_err(|e| Error::invalid(format!("lifted layer {j}: {e}")))?;
            }
        }
        Ok(HybridScene {
            lifted,
            alpha,
            assoc,
            planes,
            intrinsics,
            kind,
        })
    }

    pub fn lifted(&self) -> &[Raster] {
        &self.lifted
    }
    pub fn alpha(&self) -> &[Raster] {
        &self.alpha
    }
    pub fn assoc(&self) -> &Raster {
        &self.assoc
    }
    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }
    pub fn intrinsics(&self) -> &CameraIntrinsics {
        &self.intrinsics
    }
    pub fn kind(&self) -> ChannelKind {
        self.kind
    }
    pub fn num_lifted(&self) -> usize {
        self.lifted.len()
    }
    pub fn num_planes(&self) -> usize {
        self.planes.len()
    }
    pub fn channels(&self) -> usize {
        self.lifted[0].channels()
    }

    /// Same geometry, alpha and association with different lifted content.
    pub fn with_lifted(&self, lifted: Vec<Raster>, kind: ChannelKind) -> Result<HybridScene> {
        HybridScene::new(
            lifted,
            self.alpha.clone(),
            self.assoc.clone(),
            self.planes.clone(),
            self.intrinsics,
            kind,
        )
    }

    pub(crate) fn replace_lifted_unchecked(&self, lifted: Vec<Raster>) -> HybridScene {
        HybridScene {
            lifted,
            ..self.clone()
        }
    }
}

fn check_planes_ordered(planes: &[Plane]) -> Result<()> {
    for (i, w) in planes.windows(2).enumerate() {
        if w[1].distance() <= w[0].distance() {
            return Err(Error::invalid(format!(
                "plane distances must be strictly increasing (planes {i} and {})",
                i + 1
            )));
        }
    }
    Ok(())
}

fn check_kind_channels(kind: ChannelKind, channels: usize) -> Result<()> {
    if kind == ChannelKind::Color && channels != 3 {
        return Err(Error::invalid(format!(
            "color content needs 3 channels, got {channels}"
        )));
    }
    Ok(())
}

pub(crate) fn check_alpha_stack(alpha: &[Raster], w: usize, h: usize) -> Result<()> {
    for (i, a) in alpha.iter().enumerate() {
        if a.width() != w || a.height() != h || a.channels() != 1 {
            return Err(Error::invalid(format!(
                "alpha layer {i} is {:?}, expected {w}x{h}x1",
                a.dims()
            )));
        }
        if let Some(v) = a.data().iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!(
                "alpha layer {i} has value {v} outside [0, 1]"
            )));
        }
    }
    Ok(())
}

fn check_non_negative(r: &Raster) -> Result<()> {
    match r.data().iter().position(|v| *v < 0.0) {
        Some(i) => Err(Error::invalid(format!(
            "association entry {i} is negative ({})",
            r.data()[i]
        ))),
        None => Ok(()),
    }
}

fn check_simplex(r: &Raster) -> std::result::Result<(), String> {
    for (p, px) in r.data().chunks_exact(r.channels()).enumerate() {
        let sum: f32 = px.iter().sum();
        if px.iter().any(|v| *v < -SIMPLEX_TOL) || sum > 1.0 + SIMPLEX_TOL {
            return Err(format!(
                "pixel {p} is not a sub-probability vector (sum {sum})"
            ));
        }
    }
    Ok(())
}

/// Column weights of `Φ*_p` for plane `i`, written into `out` (length `k`).
#[inline]
fn column_weights(phi_px: &[f32], k: usize, m: usize, i: usize, out: &mut [f64]) {
    let mut sum = 0.0f64;
    for (j, o) in out.iter_mut().enumerate() {
        *o = phi_px[j * m + i] as f64;
        sum += *o;
    }
    if sum <= DEGENERATE_COLUMN_SUM {
        out.fill(1.0 / k as f64);
    } else {
        out.iter_mut().for_each(|o| *o /= sum);
    }
}

/// Divides every `(pixel, plane)` column of `phi` by its sum over lifted
/// layers. Columns summing to at most [`DEGENERATE_COLUMN_SUM`] become `1/k`.
pub fn normalize_association(phi: &Raster, k: usize, m: usize) -> Result<Raster> {
    if k == 0 || m == 0 || phi.channels() != k * m {
        return Err(Error::invalid(format!(
            "association tensor has {} channels, expected k·m = {}",
            phi.channels(),
            k * m
        )));
    }
    check_non_negative(phi)?;
    let mut out = phi.clone();
    let mut col = vec![0.0f64; k];
    for px in out.data_mut().chunks_exact_mut(k * m) {
        for i in 0..m {
            column_weights(px, k, m, i, &mut col);
            for (j, w) in col.iter().enumerate() {
                px[j * m + i] = *w as f32;
            }
        }
    }
    Ok(out)
}

/// Materialises the full MPI: at every pixel, plane content = lifted content
/// (`c × k`) times the column-normalised association (`k × m`).
pub fn expand_hybrid(scene: &HybridScene) -> Result<MpiScene> {
    let k = scene.num_lifted();
    let m = scene.num_planes();
    let c = scene.channels();
    let (w, h) = (scene.intrinsics.width(), scene.intrinsics.height());
    let phi = scene.assoc.data();
    let lifted: Vec<&[f32]> = scene.lifted.iter().map(Raster::data).collect();

    let content = par::map_indices(m, |i| {
        let mut out = Raster::zeros(w, h, c);
        let mut weights = vec![0.0f64; k];
        let mut acc = vec![0.0f64; c];
        for (p, dst) in out.data_mut().chunks_exact_mut(c).enumerate() {
            column_weights(&phi[p * k * m..(p + 1) * k * m], k, m, i, &mut weights);
            acc.fill(0.0);
            for (layer, wj) in lifted.iter().zip(&weights) {
                let src = &layer[p * c..(p + 1) * c];
                for (a, s) in acc.iter_mut().zip(src) {
                    *a += *s as f64 * wj;
                }
            }
            for (d, a) in dst.iter_mut().zip(&acc) {
                *d = *a as f32;
            }
        }
        out
    });

    Ok(MpiScene {
        planes: scene.planes.clone(),
        content,
        alpha: scene.alpha.clone(),
        intrinsics: scene.intrinsics,
        kind: scene.kind,
    })
}
