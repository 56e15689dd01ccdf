//! Scene directories: a `scene.json` manifest next to one `.raw` file per
//! raster.
//!
//! ```text
//! scene.json
//! alpha_00.raw ... alpha_{m-1}.raw      W×H×1
//! lifted_00.raw ...                     W×H×C   (hybrid scenes)
//! assoc.raw                             W×H×(k·m), channel j·m + i
//! content_00.raw ...                    W×H×C   (full MPI scenes)
//! ```
//!
//! Loading checks every raster header against the manifest dims, alpha
//! stack first, then content, then the association tensor.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{plane_set, CameraIntrinsics, Plane};
use crate::io::raw::{read_raw, write_raw};
use crate::mpi::{ChannelKind, HybridScene, MpiScene};
use crate::raster::Raster;

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_NAME: &str = "scene.json";

#[derive(Debug, Clone, PartialEq)]
pub enum Scene {
    Hybrid(HybridScene),
    Mpi(MpiScene),
}

impl Scene {
    pub fn kind(&self) -> ChannelKind {
        match self {
            Scene::Hybrid(s) => s.kind(),
            Scene::Mpi(s) => s.kind(),
        }
    }

    pub fn intrinsics(&self) -> &CameraIntrinsics {
        match self {
            Scene::Hybrid(s) => s.intrinsics(),
            Scene::Mpi(s) => s.intrinsics(),
        }
    }

    pub fn planes(&self) -> &[Plane] {
        match self {
            Scene::Hybrid(s) => s.planes(),
            Scene::Mpi(s) => s.planes(),
        }
    }

    pub fn alpha(&self) -> &[Raster] {
        match self {
            Scene::Hybrid(s) => s.alpha(),
            Scene::Mpi(s) => s.alpha(),
        }
    }

    /// The full MPI, expanding a hybrid scene if needed.
    pub fn to_mpi(&self) -> Result<MpiScene> {
        match self {
            Scene::Hybrid(s) => crate::mpi::expand_hybrid(s),
            Scene::Mpi(s) => Ok(s.clone()),
        }
    }
}

impl From<HybridScene> for Scene {
    fn from(s: HybridScene) -> Self {
        Scene::Hybrid(s)
    }
}

impl From<MpiScene> for Scene {
    fn from(s: MpiScene) -> Self {
        Scene::Mpi(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneType {
    Hybrid,
    Mpi,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub width: usize,
    pub height: usize,
    /// Content channels: 3 for colour, `l` for semantics, `f` for features.
    pub channels: usize,
    pub num_planes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_lifted: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneSetParams {
    pub near: f64,
    pub far: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneFiles {
    pub alpha: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lifted: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assoc: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub content: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneManifest {
    pub format_version: u32,
    pub scene_type: SceneType,
    pub channel_kind: ChannelKind,
    pub dims: Dims,
    pub intrinsics: CameraIntrinsics,
    /// Explicit planes; takes precedence over `plane_set`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planes: Option<Vec<Plane>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane_set: Option<PlaneSetParams>,
    pub files: SceneFiles,
    /// Extra relative paths (previews, companion scenes) keyed by role.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub assets: BTreeMap<String, String>,
}

fn numbered(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}_{i:02}.raw")).collect()
}

/// Writes `scene` into `dir` (created if missing). Existing files with the
/// same names are overwritten; callers wanting atomicity should write to a
/// scratch directory and rename.
pub fn save_scene(scene: &Scene, dir: impl AsRef<Path>) -> Result<SceneManifest> {
    save_scene_with_assets(scene, dir, BTreeMap::new())
}

pub fn save_scene_with_assets(
    scene: &Scene,
    dir: impl AsRef<Path>,
    assets: BTreeMap<String, String>,
) -> Result<SceneManifest> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let k_intr = *scene.intrinsics();
    let m = scene.planes().len();
    let files = match scene {
        Scene::Hybrid(s) => SceneFiles {
            alpha: numbered("alpha", m),
            lifted: numbered("lifted", s.num_lifted()),
            assoc: Some("assoc.raw".to_owned()),
            content: Vec::new(),
        },
        Scene::Mpi(_) => SceneFiles {
            alpha: numbered("alpha", m),
            content: numbered("content", m),
            ..Default::default()
        },
    };
    let (scene_type, channels, num_lifted) = match scene {
        Scene::Hybrid(s) => (SceneType::Hybrid, s.channels(), Some(s.num_lifted())),
        Scene::Mpi(s) => (SceneType::Mpi, s.channels(), None),
    };
    let manifest = SceneManifest {
        format_version: FORMAT_VERSION,
        scene_type,
        channel_kind: scene.kind(),
        dims: Dims {
            width: k_intr.width(),
            height: k_intr.height(),
            channels,
            num_planes: m,
            num_lifted,
        },
        intrinsics: k_intr,
        planes: Some(scene.planes().to_vec()),
        plane_set: None,
        files,
        assets,
    };

    for (name, r) in manifest.files.alpha.iter().zip(scene.alpha()) {
        write_raw(dir.join(name), r)?;
    }
    match scene {
        Scene::Hybrid(s) => {
            for (name, r) in manifest.files.lifted.iter().zip(s.lifted()) {
                write_raw(dir.join(name), r)?;
            }
            write_raw(dir.join(manifest.files.assoc.as_ref().unwrap()), s.assoc())?;
        }
        Scene::Mpi(s) => {
            for (name, r) in manifest.files.content.iter().zip(s.content()) {
                write_raw(dir.join(name), r)?;
            }
        }
    }
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    let path = dir.join(MANIFEST_NAME);
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

pub fn read_manifest(dir: impl AsRef<Path>) -> Result<SceneManifest> {
    let path = dir.as_ref().join(MANIFEST_NAME);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: SceneManifest =
        serde_json::from_str(&text).map_err(|e| Error::format(&path, e.to_string()))?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::format(
            &path,
            format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                manifest.format_version
            ),
        ));
    }
    Ok(manifest)
}

fn load_checked(dir: &Path, name: &str, w: usize, h: usize, c: usize) -> Result<Raster> {
    let path = dir.join(name);
    let r = read_raw(&path)?;
    if r.dims() != (w, h, c) {
        return Err(Error::format(
            &path,
            format!(
                "raster is {}x{}x{}, manifest declares {w}x{h}x{c}",
                r.width(),
                r.height(),
                r.channels()
            ),
        ));
    }
    Ok(r)
}

pub fn load_scene(dir: impl AsRef<Path>) -> Result<Scene> {
    let dir = dir.as_ref();
    let man = read_manifest(dir)?;
    let manifest_path = dir.join(MANIFEST_NAME);
    let bad = |reason: String| Error::format(&manifest_path, reason);
    let d = &man.dims;
    if man.intrinsics.width() != d.width || man.intrinsics.height() != d.height {
        return Err(bad(format!(
            "intrinsics are {}x{}, dims are {}x{}",
            man.intrinsics.width(),
            man.intrinsics.height(),
            d.width,
            d.height
        )));
    }
    let planes = match (&man.planes, &man.plane_set) {
        (Some(p), _) => p.clone(),
        (None, Some(ps)) => plane_set(ps.near, ps.far, ps.count)?,
        (None, None) => return Err(bad("manifest has neither planes nor plane_set".into())),
    };
    if planes.len() != d.num_planes || man.files.alpha.len() != d.num_planes {
        return Err(bad(format!(
            "{} planes and {} alpha files, dims declare {}",
            planes.len(),
            man.files.alpha.len(),
            d.num_planes
        )));
    }

    let alpha = man
        .files
        .alpha
        .iter()
        .map(|f| load_checked(dir, f, d.width, d.height, 1))
        .collect::<Result<Vec<_>>>()?;

    let scene = match man.scene_type {
        SceneType::Hybrid => {
            let k = d
                .num_lifted
                .ok_or_else(|| bad("hybrid scene without num_lifted".into()))?;
            if man.files.lifted.len() != k {
                return Err(bad(format!(
                    "{} lifted files, dims declare {k}",
                    man.files.lifted.len()
                )));
            }
            let lifted = man
                .files
                .lifted
                .iter()
                .map(|f| load_checked(dir, f, d.width, d.height, d.channels))
                .collect::<Result<Vec<_>>>()?;
            let assoc_name = man
                .files
                .assoc
                .as_deref()
                .ok_or_else(|| bad("hybrid scene without assoc file".into()))?;
            let assoc = load_checked(dir, assoc_name, d.width, d.height, k * d.num_planes)?;
            Scene::Hybrid(HybridScene::new(
                lifted,
                alpha,
                assoc,
                planes,
                man.intrinsics,
                man.channel_kind,
            )?)
        }
        SceneType::Mpi => {
            if man.files.content.len() != d.num_planes {
                return Err(bad(format!(
                    "{} content files, dims declare {}",
                    man.files.content.len(),
                    d.num_planes
                )));
            }
            let content = man
                .files
                .content
                .iter()
                .map(|f| load_checked(dir, f, d.width, d.height, d.channels))
                .collect::<Result<Vec<_>>>()?;
            Scene::Mpi(MpiScene::new(
                planes,
                content,
                alpha,
                man.intrinsics,
                man.channel_kind,
            )?)
        }
    };
    Ok(scene)
}
