//! Deterministic synthetic scenes with analytic ground truth.
//!
//! A layout is a fronto-parallel backdrop ("ground") plus axis-aligned boxes,
//! each with a label, a depth and a rectangle in reference pixels. Depths are
//! snapped to the nearest plane of the MPI, so the layout is exactly
//! representable. Ground truth for any pose is computed by casting rays
//! against the layout, independently of the rendering code.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{plane_set, CameraIntrinsics, Plane, Pose};
use crate::io::container::{save_scene_with_assets, PlaneSetParams, Scene, SceneManifest};
use crate::io::pfm::write_pfm;
use crate::io::png::{label_color, write_label_png, write_preview_png, IGNORE_LABEL_BYTE};
use crate::mpi::{ChannelKind, HybridScene};
use crate::raster::{LabelMap, Raster};

/// Label written where ground truth is undefined.
pub const IGNORE_LABEL: u32 = IGNORE_LABEL_BYTE as u32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub num_labels: usize,
    /// Lifted layer count `k`.
    pub num_lifted: usize,
    pub planes: PlaneSetParams,
    pub focal: f64,
    pub ground: Ground,
    pub primitives: Vec<Primitive>,
    /// Extra boxes drawn from the seed, appended after `primitives`.
    pub random_primitives: usize,
    /// Target poses for which ground truth is produced.
    pub poses: Vec<Pose>,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            seed: 0,
            width: 64,
            height: 48,
            num_labels: 8,
            num_lifted: 3,
            planes: PlaneSetParams {
                near: 1.0,
                far: 100.0,
                count: 32,
            },
            focal: 64.0,
            ground: Ground {
                depth: 50.0,
                label: 0,
            },
            primitives: Vec::new(),
            random_primitives: 0,
            poses: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ground {
    pub depth: f64,
    pub label: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub label: u32,
    pub depth: f64,
    /// `[x, y, width, height]` in reference pixels; may extend past the image.
    pub rect: [i64; 4],
}

/// One surface of the resolved layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Surface {
    pub label: u32,
    /// Depth before snapping; breaks ties between surfaces on one plane.
    pub depth: f64,
    pub plane: usize,
    /// `None` for the ground, which covers everything.
    pub rect: Option<[i64; 4]>,
    order: usize,
}

impl Surface {
    fn covers(&self, x: i64, y: i64) -> bool {
        match self.rect {
            None => true,
            Some([rx, ry, rw, rh]) => x >= rx && x < rx + rw && y >= ry && y < ry + rh,
        }
    }

    /// Continuous version of [`Surface::covers`]: the rectangle grown by half
    /// a pixel, matching where bilinear coverage crosses one half.
    fn covers_point(&self, u: f64, v: f64) -> bool {
        match self.rect {
            None => true,
            Some([rx, ry, rw, rh]) => {
                u >= rx as f64 - 0.5
                    && u < (rx + rw) as f64 - 0.5
                    && v >= ry as f64 - 0.5
                    && v < (ry + rh) as f64 - 0.5
            }
        }
    }

    fn sort_key(&self, other: &Surface) -> Ordering {
        self.plane
            .cmp(&other.plane)
            .then(self.depth.total_cmp(&other.depth))
            .then(self.order.cmp(&other.order))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub intrinsics: CameraIntrinsics,
    pub planes: Vec<Plane>,
    /// Primitives in spec order, ground last.
    pub surfaces: Vec<Surface>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub pose: Pose,
    /// Target-frame z of the first surface hit; 0 where nothing is hit.
    pub depth: Raster,
    /// Label of the first hit, or [`IGNORE_LABEL`] where the hit lies outside
    /// the reference view.
    pub labels: LabelMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub scene: HybridScene,
    /// Same geometry with palette colours, for previews.
    pub appearance: HybridScene,
    pub layout: Layout,
    pub ground_truth: Vec<GroundTruth>,
    pub warnings: Vec<String>,
}

fn nearest_plane(planes: &[Plane], depth: f64) -> usize {
    let mut best = 0;
    for (i, p) in planes.iter().enumerate() {
        if (p.distance() - depth).abs() < (planes[best].distance() - depth).abs() {
            best = i;
        }
    }
    best
}

fn validate(spec: &SynthSpec) -> Result<()> {
    let p = &spec.planes;
    if spec.num_labels == 0 || spec.num_labels > 255 {
        return Err(Error::invalid(format!(
            "num_labels must be in 1..=255, got {}",
            spec.num_labels
        )));
    }
    if spec.num_lifted == 0 || spec.num_lifted > p.count {
        return Err(Error::invalid(format!(
            "num_lifted must be in 1..={}, got {}",
            p.count, spec.num_lifted
        )));
    }
    let in_range = |d: f64| d >= p.near && d <= p.far;
    if !in_range(spec.ground.depth) {
        return Err(Error::invalid(format!(
            "ground depth {} is outside [{}, {}]",
            spec.ground.depth, p.near, p.far
        )));
    }
    if spec.ground.label as usize >= spec.num_labels {
        return Err(Error::invalid(format!(
            "ground label {} is not below num_labels {}",
            spec.ground.label, spec.num_labels
        )));
    }
    for (i, prim) in spec.primitives.iter().enumerate() {
        if !in_range(prim.depth) {
            return Err(Error::invalid(format!(
                "primitive {i} depth {} is outside [{}, {}]",
                prim.depth, p.near, p.far
            )));
        }
        if prim.label as usize >= spec.num_labels {
            return Err(Error::invalid(format!(
                "primitive {i} label {} is not below num_labels {}",
                prim.label, spec.num_labels
            )));
        }
        if prim.rect[2] <= 0 || prim.rect[3] <= 0 {
            return Err(Error::invalid(format!(
                "primitive {i} has empty rectangle {:?}",
                prim.rect
            )));
        }
    }
    Ok(())
}

fn random_primitives(spec: &SynthSpec, planes: &[Plane], ground_plane: usize) -> Vec<Primitive> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (w, h) = (spec.width as u32, spec.height as u32);
    // Integer draws only, so the stream is identical on every platform.
    (0..spec.random_primitives)
        .map(|_| {
            let plane = rng.random_range(0..ground_plane.max(1) as u32) as usize;
            let rw = rng.random_range(1..=(w / 3).max(1));
            let rh = rng.random_range(1..=(h / 2).max(1));
            let rx = rng.random_range(0..w);
            let ry = rng.random_range(0..h);
            Primitive {
                label: rng.random_range(0..spec.num_labels as u32),
                depth: planes[plane].distance(),
                rect: [rx as i64, ry as i64, rw as i64, rh as i64],
            }
        })
        .collect()
}

/// Surfaces covering reference pixel `(x, y)`, front to back, at most one per
/// plane, nothing behind the ground.
fn pixel_surfaces<'a>(surfaces: &'a [Surface], x: i64, y: i64, out: &mut Vec<&'a Surface>) {
    out.clear();
    out.extend(surfaces.iter().filter(|s| s.covers(x, y)));
    out.sort_by(|a, b| a.sort_key(b));
    out.dedup_by_key(|s| s.plane);
    if let Some(g) = out.iter().position(|s| s.rect.is_none()) {
        out.truncate(g + 1);
    }
}

pub fn synth_scene(spec: &SynthSpec) -> Result<SynthOutput> {
    validate(spec)?;
    let intrinsics = CameraIntrinsics::centered(spec.focal, spec.width, spec.height)?;
    let planes = plane_set(spec.planes.near, spec.planes.far, spec.planes.count)?;
    let ground_plane = nearest_plane(&planes, spec.ground.depth);
    let mut warnings = Vec::new();

    let mut prims = spec.primitives.clone();
    prims.extend(random_primitives(spec, &planes, ground_plane));
    let (w, h) = (spec.width as i64, spec.height as i64);
    let mut surfaces = Vec::with_capacity(prims.len() + 1);
    for (i, p) in prims.iter().enumerate() {
        let [rx, ry, rw, rh] = p.rect;
        if rx >= w || ry >= h || rx + rw <= 0 || ry + rh <= 0 {
            warnings.push(format!(
                "primitive {i} at {:?} is outside the reference view and was dropped",
                p.rect
            ));
            continue;
        }
        let plane = nearest_plane(&planes, p.depth);
        if plane > ground_plane {
            warnings.push(format!("primitive {i} lies behind the ground"));
        }
        surfaces.push(Surface {
            label: p.label,
            depth: p.depth,
            plane,
            rect: Some(p.rect),
            order: i,
        });
    }
    surfaces.push(Surface {
        label: spec.ground.label,
        depth: spec.ground.depth,
        plane: ground_plane,
        rect: None,
        order: usize::MAX,
    });

    let (k, m, l) = (spec.num_lifted, planes.len(), spec.num_labels);
    let (wu, hu) = (spec.width, spec.height);
    let mut lifted = vec![Raster::zeros(wu, hu, l); k];
    let mut colors = vec![Raster::zeros(wu, hu, 3); k];
    let mut alpha = vec![Raster::zeros(wu, hu, 1); m];
    let mut assoc = Raster::zeros(wu, hu, k * m);
    let mut overflow = 0usize;
    let mut stack = Vec::new();
    for y in 0..hu {
        for x in 0..wu {
            pixel_surfaces(&surfaces, x as i64, y as i64, &mut stack);
            if stack.len() > k {
                overflow += 1;
                // Keep the ground so every pixel stays opaque.
                let ground = *stack.last().unwrap();
                stack.truncate(k.saturating_sub(1).max(1));
                if k >= 2 {
                    stack.push(ground);
                }
            }
            let shade = if ((x / 8) + (y / 8)) % 2 == 0 { 1.0 } else { 0.75 };
            for j in 0..k {
                let s = stack.get(j).copied();
                let label = s.map_or(spec.ground.label, |s| s.label);
                lifted[j].set(x, y, label as usize, 1.0);
                let c = label_color(label);
                for (ch, v) in c.iter().enumerate() {
                    colors[j].set(x, y, ch, *v as f32 / 255.0 * shade);
                }
                if let Some(s) = s {
                    alpha[s.plane].set(x, y, 0, 1.0);
                    assoc.set(x, y, j * m + s.plane, 1.0);
                }
            }
        }
    }
    if overflow > 0 {
        warnings.push(format!(
            "{overflow} pixels have more than {k} surfaces; deeper surfaces were dropped"
        ));
    }

    let scene = HybridScene::new(
        lifted,
        alpha,
        assoc,
        planes.clone(),
        intrinsics,
        ChannelKind::Semantics,
    )?;
    let appearance = scene.with_lifted(colors, ChannelKind::Color)?;
    let layout = Layout {
        intrinsics,
        planes,
        surfaces,
    };
    let ground_truth = spec.poses.iter().map(|p| layout.ground_truth(p)).collect();
    Ok(SynthOutput {
        scene,
        appearance,
        layout,
        ground_truth,
        warnings,
    })
}

impl Layout {
    /// Ray-casts every target pixel against the layout. The target camera
    /// shares the reference intrinsics.
    pub fn ground_truth(&self, pose: &Pose) -> GroundTruth {
        let k = &self.intrinsics;
        let (w, h) = (k.width(), k.height());
        let inv = pose.inverse();
        let centre = inv.translation();
        let rt = inv.rotation();
        let mut depth = Raster::zeros(w, h, 1);
        let mut labels = LabelMap::filled(w, h, IGNORE_LABEL);
        for y in 0..h {
            for x in 0..w {
                let ray_t = Vector3::new(
                    (x as f64 - k.cx()) / k.fx(),
                    (y as f64 - k.cy()) / k.fy(),
                    1.0,
                );
                let ray = rt * ray_t;
                let mut best: Option<(f64, &Surface, f64, f64)> = None;
                for s in &self.surfaces {
                    if ray.z.abs() < 1e-12 {
                        continue;
                    }
                    let d = self.planes[s.plane].distance();
                    let t = (d - centre.z) / ray.z;
                    if t <= 0.0 {
                        continue;
                    }
                    let p = centre + ray * t;
                    let u = k.fx() * p.x / p.z + k.cx();
                    let v = k.fy() * p.y / p.z + k.cy();
                    if !s.covers_point(u, v) {
                        continue;
                    }
                    let closer = match best {
                        None => true,
                        Some((bt, bs, ..)) => t < bt || (t == bt && s.sort_key(bs) == Ordering::Less),
                    };
                    if closer {
                        best = Some((t, s, u, v));
                    }
                }
                if let Some((t, s, u, v)) = best {
                    depth.set(x, y, 0, t as f32);
                    let inside = u >= 0.0 && u <= (w - 1) as f64 && v >= 0.0 && v <= (h - 1) as f64;
                    if inside {
                        labels.set(x, y, s.label);
                    }
                }
            }
        }
        GroundTruth {
            pose: *pose,
            depth,
            labels,
        }
    }
}

/// Writes the semantic scene to `dir`, the colour scene to `dir/appearance`,
/// and per-pose ground truth as `gt_depth_NN.pfm` / `gt_labels_NN.png`.
pub fn write_synth(out: &SynthOutput, dir: impl AsRef<Path>) -> Result<SceneManifest> {
    let dir = dir.as_ref();
    save_scene_with_assets(&Scene::Hybrid(out.appearance.clone()), dir.join("appearance"), BTreeMap::new())?;
    let mut assets = BTreeMap::new();
    assets.insert("appearance".to_owned(), "appearance".to_owned());
    let ref_labels = out.scene.lifted()[0].argmax();
    write_label_png(dir.join("labels_ref.png"), &ref_labels)?;
    assets.insert("labels_ref".to_owned(), "labels_ref.png".to_owned());
    let preview = &out.appearance.lifted()[0];
    write_preview_png(dir.join("preview_ref.png"), preview)?;
    assets.insert("preview_ref".to_owned(), "preview_ref.png".to_owned());
    for (i, gt) in out.ground_truth.iter().enumerate() {
        let depth_name = format!("gt_depth_{i:02}.pfm");
        let label_name = format!("gt_labels_{i:02}.png");
        let pose_name = format!("pose_{i:02}.json");
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_pfm(dir.join(&depth_name), &gt.depth)?;
        write_label_png(dir.join(&label_name), &gt.labels)?;
        let pose_path = dir.join(&pose_name);
        let json = serde_json::to_string_pretty(&gt.pose).expect("pose serialises");
        std::fs::write(&pose_path, json + "\n").map_err(|e| Error::io(&pose_path, e))?;
        assets.insert(format!("gt_depth_{i:02}"), depth_name);
        assets.insert(format!("gt_labels_{i:02}"), label_name);
        assets.insert(format!("pose_{i:02}"), pose_name);
    }
    save_scene_with_assets(&Scene::Hybrid(out.scene.clone()), dir, assets)
}
