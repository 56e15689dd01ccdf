//! Scene persistence, raster formats and synthetic fixtures.

pub mod container;
pub mod pfm;
pub mod png;
pub mod raw;
pub mod synth;

pub use container::{
    load_scene, read_manifest, save_scene, save_scene_with_assets, Dims, PlaneSetParams, Scene,
    SceneFiles, SceneManifest, SceneType, FORMAT_VERSION, MANIFEST_NAME,
};
pub use pfm::{decode_pfm, encode_pfm, read_pfm, write_pfm};
pub use png::{
    decode_label_png, decode_preview_png, encode_label_png, encode_preview_png, label_color,
    quantize, read_label_png, read_preview_png, write_label_png, write_preview_png,
    IGNORE_LABEL_BYTE,
};
pub use raw::{decode_raw, encode_raw, read_raw, write_raw, RAW_HEADER_LEN, RAW_MAGIC};
pub use synth::{
    synth_scene, write_synth, Ground, GroundTruth, Layout, Primitive, Surface, SynthOutput,
    SynthSpec, IGNORE_LABEL,
};
