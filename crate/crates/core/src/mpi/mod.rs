//! Scene containers, association expansion, compositing, depth and edits.

mod composite;
mod depth;
mod edit;
mod scene;

pub use composite::{
    composite, plane_homographies, render_semantics, render_view, CompositeOutput, SemanticRender,
    MIN_COVERAGE,
};
pub use depth::{
    depth_from_alpha, depth_to_disparity, inverse_depth_from_alpha, DepthInput, DepthMode,
    DEFAULT_BASELINE,
};
pub use edit::{apply_edits, EditAction, EditOp, EditScript, Region, Stamp};
pub use scene::{
    expand_hybrid, normalize_association, ChannelKind, HybridScene, MpiScene,
    DEGENERATE_COLUMN_SUM,
};
