//! Object insertion and removal on the lifted semantic layers.
//!
//! Edits touch lifted content only. Alpha and the association tensor are
//! shared with the source scene, so an edit on a layer shows up wherever that
//! layer is distributed to a visible plane.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mpi::scene::{ChannelKind, HybridScene};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EditScript {
    pub ops: Vec<EditOp>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditOp {
    /// Lifted layer index; layer 0 holds the input semantics.
    pub layer: usize,
    /// Pixels the op may touch. `None` means the whole layer.
    #[serde(default)]
    pub region: Option<Region>,
    pub action: EditAction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Rect {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },
    /// Row-major mask of the full layer; non-zero entries are inside.
    Mask {
        width: usize,
        height: usize,
        data: Vec<u8>,
    },
}

impl Region {
    fn validate(&self, w: usize, h: usize) -> Result<()> {
        match *self {
            Region::Rect {
                x,
                y,
                width,
                height,
            } => {
                if x.checked_add(width).is_none_or(|r| r > w) || y.checked_add(height).is_none_or(|b| b > h) {
                    return Err(Error::invalid(format!(
                        "rectangle ({x}, {y}) {width}x{height} exceeds the {w}x{h} layer"
                    )));
                }
            }
            Region::Mask {
                width,
                height,
                ref data,
            } => {
                if width != w || height != h || data.len() != w * h {
                    return Err(Error::invalid(format!(
                        "mask is {width}x{height} with {} entries, layer is {w}x{h}",
                        data.len()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, px: usize, py: usize) -> bool {
        match *self {
            Region::Rect {
                x,
                y,
                width,
                height,
            } => px >= x && px < x + width && py >= y && py < y + height,
            Region::Mask {
                width, ref data, ..
            } => data[py * width + px] != 0,
        }
    }
}

/// Labels to paste; `None` cells leave the layer untouched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stamp {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<Option<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EditAction {
    /// Paint the region with a one-hot label (object insertion).
    SetLabel { label: u32 },
    /// Overwrite the region with a fill label (object removal).
    Erase { fill: u32 },
    /// Paste a label stamp with its top-left corner at `anchor`.
    PasteStamp { stamp: Stamp, anchor: [usize; 2] },
}

fn check_label(label: u32, num_labels: usize) -> Result<()> {
    if label as usize >= num_labels {
        return Err(Error::invalid(format!(
            "label {label} is outside 0..{num_labels}"
        )));
    }
    Ok(())
}

fn validate_op(op: &EditOp, k: usize, l: usize, w: usize, h: usize) -> Result<()> {
    if op.layer >= k {
        return Err(Error::invalid(format!(
            "edit targets layer {} but the scene has {k} lifted layers",
            op.layer
        )));
    }
    if let Some(region) = &op.region {
        region.validate(w, h)?;
    }
    match &op.action {
        EditAction::SetLabel { label } => check_label(*label, l),
        EditAction::Erase { fill } => check_label(*fill, l),
        EditAction::PasteStamp { stamp, anchor } => {
            if stamp.labels.len() != stamp.width * stamp.height {
                return Err(Error::invalid(format!(
                    "stamp is {}x{} but has {} labels",
                    stamp.width,
                    stamp.height,
                    stamp.labels.len()
                )));
            }
            if anchor[0].checked_add(stamp.width).is_none_or(|r| r > w)
                || anchor[1].checked_add(stamp.height).is_none_or(|b| b > h)
            {
                return Err(Error::invalid(format!(
                    "stamp at ({}, {}) of size {}x{} exceeds the {w}x{h} layer",
                    anchor[0], anchor[1], stamp.width, stamp.height
                )));
            }
            stamp.labels.iter().flatten().try_for_each(|lab| check_label(*lab, l))
        }
    }
}

/// Applies `script` in order. Every op is validated before anything is
/// written, so a bad script leaves no partial result.
pub fn apply_edits(scene: &HybridScene, script: &EditScript) -> Result<HybridScene> {
    if scene.kind() != ChannelKind::Semantics {
        return Err(Error::invalid(format!(
            "edits need a semantics scene, got {:?}",
            scene.kind()
        )));
    }
    let (w, h) = (scene.intrinsics().width(), scene.intrinsics().height());
    let (k, l) = (scene.num_lifted(), scene.channels());
    for (i, op) in script.ops.iter().enumerate() {
        validate_op(op, k, l, w, h).map_err(|e| match e {
            Error::Invalid(msg) => Error::invalid(format!("edit op {i}: {msg}")),
            other => other,
        })?;
    }
    if script.ops.is_empty() {
        return Ok(scene.clone());
    }

    let mut lifted = scene.lifted().to_vec();
    let mut one_hot = vec![0.0f32; l];
    let mut paint = |layer: usize, x: usize, y: usize, label: u32| {
        one_hot.fill(0.0);
        one_hot[label as usize] = 1.0;
        lifted[layer].set_pixel(x, y, &one_hot);
    };
    for op in &script.ops {
        let inside = |x: usize, y: usize| op.region.as_ref().is_none_or(|r| r.contains(x, y));
        match &op.action {
            EditAction::SetLabel { label: lab } | EditAction::Erase { fill: lab } => {
                for y in 0..h {
                    for x in 0..w {
                        if inside(x, y) {
                            paint(op.layer, x, y, *lab);
                        }
                    }
                }
            }
            EditAction::PasteStamp { stamp, anchor } => {
                for sy in 0..stamp.height {
                    for sx in 0..stamp.width {
                        let (x, y) = (anchor[0] + sx, anchor[1] + sy);
                        if let Some(lab) = stamp.labels[sy * stamp.width + sx] {
                            if inside(x, y) {
                                paint(op.layer, x, y, lab);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(scene.replace_lifted_unchecked(lifted))
}
