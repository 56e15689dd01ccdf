//! Multi-plane image scenes: plane geometry, homography warping, alpha
//! compositing, lifted semantic layers, depth from transparency, and the
//! evaluation metrics used to score rendered views.

pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod mpi;
mod par;
pub mod raster;

pub use error::{Error, ErrorKind, Result};
pub use geometry::{CameraIntrinsics, Homography, Plane, Pose};
pub use raster::{BorderPolicy, LabelMap, Raster};
