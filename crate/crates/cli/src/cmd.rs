use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use mpi_core::geometry::{plane_set, CameraIntrinsics, Pose};
use mpi_core::io::{
    load_scene, read_label_png, read_pfm, read_preview_png, read_raw, save_scene, synth_scene,
    write_synth, Scene, SynthSpec, MANIFEST_NAME,
};
use mpi_core::metrics::{
    class_accuracy_and_iou, confusion, depth_metrics, photometric, MetricRecord,
};
use mpi_core::mpi::{
    apply_edits, depth_from_alpha, depth_to_disparity, inverse_depth_from_alpha, render_view,
    DepthInput, DepthMode, EditScript,
};
use mpi_core::{BorderPolicy, Raster};
use serde::de::DeserializeOwned;

use crate::output::{commit, emit_json, encode_for, stage_dir, stage_file, transmittance_path};
use crate::{
    Border, DepthArgs, EditArgs, ExpandArgs, MetricKind, MetricsArgs, PlanesArgs, PoseArgs,
    RenderArgs, SynthArgs, Usage,
};

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {what} {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("invalid {what} {}: {e}", path.display())))
}

fn check_scene_dir(dir: &Path) -> Result<()> {
    if !dir.join(MANIFEST_NAME).is_file() {
        return Err(usage(format!(
            "{} is not a scene directory (no {MANIFEST_NAME})",
            dir.display()
        )));
    }
    Ok(())
}

fn check_extension(path: &Path, allowed: &[&str]) -> Result<()> {
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    if !allowed.contains(&ext.as_str()) {
        return Err(usage(format!(
            "{}: expected one of {}",
            path.display(),
            allowed.iter().map(|a| format!(".{a}")).collect::<Vec<_>>().join(", ")
        )));
    }
    Ok(())
}

fn resolve_pose(p: &PoseArgs) -> Result<Pose> {
    if let Some(path) = &p.pose {
        return read_json(path, "pose");
    }
    if let Some(text) = &p.pose_inline {
        return serde_json::from_str(text).map_err(|e| usage(format!("invalid inline pose: {e}")));
    }
    let finite = |v: f64| {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(usage("pose offsets must be finite"))
        }
    };
    if let Some(x) = p.lateral {
        return Ok(Pose::lateral(finite(x)?));
    }
    if let Some(z) = p.forward {
        return Ok(Pose::forward(finite(z)?));
    }
    Err(usage("one of --pose, --pose-inline, --lateral, --forward is required"))
}

fn read_raster(path: &Path) -> Result<Raster> {
    check_extension(path, &["pfm", "raw", "png"])?;
    let ext = path.extension().unwrap().to_string_lossy().to_ascii_lowercase();
    Ok(match ext.as_str() {
        "pfm" => read_pfm(path)?,
        "raw" => read_raw(path)?,
        _ => read_preview_png(path)?,
    })
}

pub fn render(a: &RenderArgs) -> Result<()> {
    check_extension(&a.out, &["pfm", "png", "raw"])?;
    check_scene_dir(&a.scene)?;
    let pose = resolve_pose(&a.pose)?;
    let k_tgt: Option<CameraIntrinsics> = a
        .target_intrinsics
        .as_deref()
        .map(|p| read_json(p, "intrinsics"))
        .transpose()?;

    let scene = load_scene(&a.scene)?;
    let mpi = scene.to_mpi()?;
    let k_tgt = k_tgt.unwrap_or(*mpi.intrinsics());
    let border = match a.border {
        Border::Transparent => BorderPolicy::Transparent,
        Border::Clamp => BorderPolicy::Clamp,
    };
    let out = render_view(&mpi, &k_tgt, &pose, border)?;
    let image = if a.normalized { out.normalized() } else { out.image.clone() };
    log::info!(
        "rendered {}x{}x{} from {} planes",
        image.width(),
        image.height(),
        image.channels(),
        mpi.num_planes()
    );
    let staged = vec![
        stage_file(&a.out, &encode_for(&a.out, &image, mpi.kind())?)?,
        stage_file(&transmittance_path(&a.out), &mpi_core::io::encode_pfm(&out.transmittance)?)?,
    ];
    commit(staged)
}

pub fn depth(a: &DepthArgs) -> Result<()> {
    check_extension(&a.out, &["pfm", "raw"])?;
    check_scene_dir(&a.scene)?;
    if let Some(fx) = a.fx {
        if !(fx.is_finite() && fx > 0.0) {
            return Err(usage(format!("--fx must be positive, got {fx}")));
        }
    }
    if !(a.baseline.is_finite() && a.baseline > 0.0) {
        return Err(usage(format!("--baseline must be positive, got {}", a.baseline)));
    }
    let scene = load_scene(&a.scene)?;
    let mode = if a.normalized { DepthMode::Normalized } else { DepthMode::Raw };
    let map = if a.inverse {
        inverse_depth_from_alpha(scene.alpha(), scene.planes(), mode)?
    } else {
        depth_from_alpha(scene.alpha(), scene.planes(), mode)?
    };
    let map = if a.disparity {
        let fx = a.fx.unwrap_or(scene.intrinsics().fx());
        let input = if a.inverse { DepthInput::InverseDepth } else { DepthInput::Depth };
        depth_to_disparity(&map, fx, a.baseline, input)?
    } else {
        map
    };
    commit(vec![stage_file(&a.out, &encode_for(&a.out, &map, scene.kind())?)?])
}

pub fn expand(a: &ExpandArgs) -> Result<()> {
    check_scene_dir(&a.scene)?;
    let scene = load_scene(&a.scene)?;
    let mpi = Scene::Mpi(scene.to_mpi()?);
    let staged = stage_dir(&a.out, |dir| {
        save_scene(&mpi, dir)?;
        Ok(())
    })?;
    commit(vec![staged])
}

pub fn edit(a: &EditArgs) -> Result<()> {
    check_scene_dir(&a.scene)?;
    let script: EditScript = read_json(&a.script, "edit script")?;
    let Scene::Hybrid(hybrid) = load_scene(&a.scene)? else {
        return Err(usage("edits apply to hybrid scenes; this scene is a full MPI"));
    };
    let edited = Scene::Hybrid(apply_edits(&hybrid, &script)?);
    let staged = stage_dir(&a.out, |dir| {
        save_scene(&edited, dir)?;
        Ok(())
    })?;
    commit(vec![staged])
}

fn parse_range(s: &str) -> Result<(f64, f64)> {
    let bad = || usage(format!("--range must look like MIN:MAX, got {s:?}"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}

pub fn metrics(a: &MetricsArgs) -> Result<()> {
    let records: Vec<MetricRecord> = match a.kind {
        MetricKind::Sem => {
            check_extension(&a.pred, &["png"])?;
            check_extension(&a.gt, &["png"])?;
            let pred = read_label_png(&a.pred)?;
            let gt = read_label_png(&a.gt)?;
            let num_classes = match a.num_classes {
                Some(n) => n,
                None => {
                    let max = pred
                        .labels()
                        .iter()
                        .chain(gt.labels().iter().filter(|l| **l != a.ignore))
                        .max()
                        .copied()
                        .unwrap_or(0);
                    max as usize + 1
                }
            };
            let cm = confusion(&pred, &gt, num_classes, Some(a.ignore))?;
            class_accuracy_and_iou(&cm)?.to_records()
        }
        MetricKind::Depth => {
            let (lo, hi) = parse_range(&a.range)?;
            check_extension(&a.pred, &["pfm", "raw"])?;
            check_extension(&a.gt, &["pfm", "raw"])?;
            depth_metrics(&read_raster(&a.pred)?, &read_raster(&a.gt)?, lo, hi)?.to_records(lo, hi)
        }
        MetricKind::Photo => photometric(&read_raster(&a.pred)?, &read_raster(&a.gt)?)?.to_records(),
    };
    emit_json(&a.out, &records)
}

pub fn synth(a: &SynthArgs) -> Result<()> {
    let spec: SynthSpec = read_json(&a.spec, "synth spec")?;
    let out = synth_scene(&spec)?;
    for w in &out.warnings {
        log::warn!("{w}");
    }
    let staged = stage_dir(&a.out, |dir| {
        write_synth(&out, dir).context("writing synthetic scene")?;
        Ok(())
    })?;
    commit(vec![staged])
}

pub fn planes(a: &PlanesArgs) -> Result<()> {
    let planes = plane_set(a.near, a.far, a.m)?;
    emit_json(&a.out, &planes)
}
