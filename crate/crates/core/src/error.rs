use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the scene engine.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition (shape, range, invariant).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// The target camera centre lies on an MPI plane, so the plane-induced
    /// homography does not exist.
    #[error("degenerate homography{}: |denominator| = {denominator:e}", plane_suffix(*.plane))]
    DegenerateHomography {
        plane: Option<usize>,
        denominator: f64,
    },

    #[error("point is behind the camera (z = {z:e})")]
    BehindCamera { z: f64 },

    #[error("{count} pixel(s) have non-positive depth")]
    NonPositiveDepth { count: usize },

    #[error("label {label} at pixel ({x}, {y}) is outside 0..{num_classes}")]
    LabelOutOfRange {
        x: usize,
        y: usize,
        label: u32,
        num_classes: usize,
    },

    #[error("no pixel passed the evaluation filter")]
    NoValidPixels,

    #[error("{}: {reason}", path.display())]
    Format { path: PathBuf, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn plane_suffix(plane: Option<usize>) -> String {
    plane.map(|i| format!(" for plane {i}")).unwrap_or_default()
}

/// Coarse classification used by front ends to choose exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numeric,
    Io,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Invalid(_) | Error::LabelOutOfRange { .. } | Error::NoValidPixels => {
                ErrorKind::Validation
            }
            Error::DegenerateHomography { .. }
            | Error::BehindCamera { .. }
            | Error::NonPositiveDepth { .. } => ErrorKind::Numeric,
            Error::Format { .. } | Error::Io { .. } => ErrorKind::Io,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
