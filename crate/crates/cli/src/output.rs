//! Outputs are staged next to their destination and renamed into place only
//! after every output of a command has been produced.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use mpi_core::io::{encode_label_png, encode_pfm, encode_preview_png, encode_raw};
use mpi_core::mpi::ChannelKind;
use mpi_core::Raster;
use tempfile::{NamedTempFile, TempDir};

use crate::Usage;

fn parent_of(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

fn file_stem(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into())
}

pub enum Staged {
    File { tmp: NamedTempFile, dest: PathBuf },
    Dir { tmp: TempDir, dest: PathBuf },
}

pub fn stage_file(dest: &Path, bytes: &[u8]) -> Result<Staged> {
    let parent = parent_of(dest);
    fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    let mut tmp = tempfile::Builder::new()
        .prefix(&format!(".{}.", file_stem(dest)))
        .tempfile_in(parent)
        .with_context(|| format!("staging {}", dest.display()))?;
    tmp.write_all(bytes)
        .and_then(|_| tmp.flush())
        .with_context(|| format!("writing {}", dest.display()))?;
    Ok(Staged::File {
        tmp,
        dest: dest.to_owned(),
    })
}

/// Runs `fill` on an empty scratch directory that later replaces `dest`.
pub fn stage_dir(dest: &Path, fill: impl FnOnce(&Path) -> Result<()>) -> Result<Staged> {
    let parent = parent_of(dest);
    fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    let tmp = tempfile::Builder::new()
        .prefix(&format!(".{}.", file_stem(dest)))
        .tempdir_in(parent)
        .with_context(|| format!("staging {}", dest.display()))?;
    fill(tmp.path())?;
    Ok(Staged::Dir {
        tmp,
        dest: dest.to_owned(),
    })
}

/// Scratch files are created owner-only; outputs get the usual modes.
#[cfg(unix)]
fn relax_permissions(path: &Path, mode: u32) -> Result<()> {
    use std::os::unix::fs::PermissionsExt;
    fs::set_permissions(path, fs::Permissions::from_mode(mode))
        .with_context(|| format!("setting permissions on {}", path.display()))
}

#[cfg(not(unix))]
fn relax_permissions(_: &Path, _: u32) -> Result<()> {
    Ok(())
}

/// Moves every staged output into place. A directory destination that
/// already exists is replaced as a whole.
pub fn commit(staged: Vec<Staged>) -> Result<()> {
    for s in staged {
        match s {
            Staged::File { tmp, dest } => {
                relax_permissions(tmp.path(), 0o644)?;
                tmp.persist(&dest)
                    .with_context(|| format!("moving output to {}", dest.display()))?;
            }
            Staged::Dir { tmp, dest } => {
                let old = if dest.exists() {
                    let holder = tempfile::Builder::new()
                        .prefix(&format!(".{}.old.", file_stem(&dest)))
                        .tempdir_in(parent_of(&dest))?;
                    let aside = holder.path().join("previous");
                    fs::rename(&dest, &aside)
                        .with_context(|| format!("moving aside {}", dest.display()))?;
                    Some(holder)
                } else {
                    None
                };
                relax_permissions(tmp.path(), 0o755)?;
                let path = tmp.keep();
                fs::rename(&path, &dest)
                    .with_context(|| format!("moving output to {}", dest.display()))?;
                drop(old);
            }
        }
    }
    Ok(())
}

/// Encodes a raster for `path`, chosen by extension. PNG output is a label
/// map for semantic content and an 8-bit preview otherwise.
pub fn encode_for(path: &Path, r: &Raster, kind: ChannelKind) -> Result<Vec<u8>> {
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    Ok(match ext.as_str() {
        "pfm" => encode_pfm(r)?,
        "raw" => encode_raw(r),
        "png" if kind == ChannelKind::Semantics => encode_label_png(&r.argmax())?,
        "png" => encode_preview_png(r)?,
        _ => {
            return Err(Usage(format!(
                "cannot infer output format of {}; use .pfm, .png or .raw",
                path.display()
            ))
            .into())
        }
    })
}

/// Writes JSON to `path`, or to stdout for `-`.
pub fn emit_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    if path == Path::new("-") {
        std::io::stdout().write_all(text.as_bytes())?;
        return Ok(());
    }
    commit(vec![stage_file(path, text.as_bytes())?])
}

/// `dir/stem_transmittance.pfm` for an output `dir/stem.ext`.
pub fn transmittance_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    parent_of(out).join(format!("{stem}_transmittance.pfm"))
}
