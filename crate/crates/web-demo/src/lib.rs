//! Browser front end: a synthetic street-like scene that can be viewed from a
//! moving camera, turned into a depth map, and edited in its lifted layers.

use mpi_core::geometry::Pose;
use mpi_core::io::{label_color, synth_scene, Primitive, SynthSpec};
use mpi_core::mpi::{
    apply_edits, depth_from_alpha, expand_hybrid, render_view, DepthMode, EditAction, EditOp,
    EditScript, HybridScene, MpiScene, Region,
};
use mpi_core::BorderPolicy;
use wasm_bindgen::prelude::*;

fn js_err(e: mpi_core::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn default_spec(seed: u64) -> SynthSpec {
    SynthSpec {
        seed,
        width: 192,
        height: 128,
        focal: 150.0,
        num_labels: 8,
        num_lifted: 4,
        random_primitives: 4,
        primitives: vec![
            Primitive { label: 3, depth: 6.0, rect: [60, 40, 36, 60] },
            Primitive { label: 5, depth: 14.0, rect: [120, 20, 14, 90] },
        ],
        ..Default::default()
    }
}

#[wasm_bindgen]
pub struct Demo {
    semantics: HybridScene,
    expanded: MpiScene,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32) -> Result<Demo, JsValue> {
        let out = synth_scene(&default_spec(seed as u64)).map_err(js_err)?;
        Demo::from_scene(out.scene)
    }

    fn from_scene(semantics: HybridScene) -> Result<Demo, JsValue> {
        let expanded = expand_hybrid(&semantics).map_err(js_err)?;
        Ok(Demo { semantics, expanded })
    }

    pub fn width(&self) -> usize {
        self.semantics.intrinsics().width()
    }

    pub fn height(&self) -> usize {
        self.semantics.intrinsics().height()
    }

    pub fn num_labels(&self) -> usize {
        self.semantics.channels()
    }

    pub fn num_layers(&self) -> usize {
        self.semantics.num_lifted()
    }

    /// RGBA view from a camera moved `lateral` metres right and `forward`
    /// metres ahead. `labels` picks the argmax label map over the blended
    /// palette colours.
    pub fn render(&self, lateral: f64, forward: f64, labels: bool) -> Result<Vec<u8>, JsValue> {
        if !(lateral.is_finite() && forward.is_finite()) {
            return Err(JsValue::from_str("camera offsets must be finite"));
        }
        let pose = Pose::lateral(lateral).compose(&Pose::forward(forward));
        let out = render_view(&self.expanded, self.expanded.intrinsics(), &pose, BorderPolicy::Transparent)
            .map_err(js_err)?;
        let (w, h) = (out.image.width(), out.image.height());
        let mut rgba = Vec::with_capacity(w * h * 4);
        if labels {
            let map = out.image.argmax();
            for y in 0..h {
                for x in 0..w {
                    let covered = out.transmittance.get(x, y, 0) < 0.5;
                    let [r, g, b] = if covered { label_color(map.get(x, y)) } else { [0, 0, 0] };
                    rgba.extend_from_slice(&[r, g, b, 255]);
                }
            }
        } else {
            let palette: Vec<[f32; 3]> = (0..self.num_labels() as u32)
                .map(|l| label_color(l).map(|c| c as f32))
                .collect();
            for px in out.image.data().chunks(out.image.channels()) {
                let mut rgb = [0.0f32; 3];
                for (p, col) in px.iter().zip(&palette) {
                    for c in 0..3 {
                        rgb[c] += p * col[c];
                    }
                }
                rgba.extend(rgb.map(|v| v.round().clamp(0.0, 255.0) as u8));
                rgba.push(255);
            }
        }
        Ok(rgba)
    }

    /// RGBA inverse-depth shading of the reference view, near bright.
    pub fn depth(&self) -> Result<Vec<u8>, JsValue> {
        let d = depth_from_alpha(self.semantics.alpha(), self.semantics.planes(), DepthMode::Normalized)
            .map_err(js_err)?;
        let planes = self.semantics.planes();
        let near = planes.first().map_or(1.0, |p| p.distance()) as f32;
        let far = planes.last().map_or(1.0, |p| p.distance()) as f32;
        let span = (1.0 / near - 1.0 / far).max(f32::EPSILON);
        Ok(d.data()
            .iter()
            .flat_map(|&z| {
                let v = ((1.0 / z.max(near) - 1.0 / far) / span).clamp(0.0, 1.0);
                let g = (v * 255.0 + 0.5) as u8;
                [g, g, g, 255]
            })
            .collect())
    }

    /// Paints `label` into a rectangle of lifted layer `layer`. `erase`
    /// overwrites with the label as background fill instead.
    #[allow(clippy::too_many_arguments)]
    pub fn edit(
        &mut self,
        layer: usize,
        x: usize,
        y: usize,
        width: usize,
        height: usize,
        label: u32,
        erase: bool,
    ) -> Result<(), JsValue> {
        let script = rect_edit(layer, x, y, width, height, label, erase);
        let edited = apply_edits(&self.semantics, &script).map_err(js_err)?;
        *self = Demo::from_scene(edited)?;
        Ok(())
    }
}

fn rect_edit(layer: usize, x: usize, y: usize, width: usize, height: usize, label: u32, erase: bool) -> EditScript {
    let action = if erase {
        EditAction::Erase { fill: label }
    } else {
        EditAction::SetLabel { label }
    };
    EditScript {
        ops: vec![EditOp {
            layer,
            region: Some(Region::Rect { x, y, width, height }),
            action,
        }],
    }
}
