//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by state construction, measurement, simulation, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A two-qubit state was supplied with a norm too far from 1.
    #[error("state norm {norm} deviates from 1 by more than {tol}")]
    NotNormalized { norm: f64, tol: f64 },

    /// Hardy amplitudes (alpha, beta) outside the admissible open interval.
    #[error("degenerate Hardy amplitudes alpha={alpha}, beta={beta}: no Hardy angles exist for product states")]
    DegenerateState { alpha: f64, beta: f64 },

    /// Hardy amplitudes whose squared sum is far from 1.
    #[error("alpha^2 + beta^2 = {sum} deviates from 1 by more than {tol}")]
    NotUnitPair { sum: f64, tol: f64 },

    /// The closed-form angle solver only covers the phi = pi family.
    #[error("closed-form Hardy angles require phi = pi; got phi = {phi} rad (override angles explicitly)")]
    UnsupportedPhase { phi: f64 },

    /// A channel index outside 1..=4.
    #[error("invalid Hardy channel index {0} (expected 1..=4)")]
    InvalidChannel(u8),

    /// Two grid-sampled quantities with incompatible grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Decomposition and spectrum truncations disagree.
    #[error("truncation mismatch: {0}")]
    TruncationMismatch(String),

    /// Image pair with different dimensions.
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    /// ROI not contained in the image, or empty.
    #[error("invalid ROI: {0}")]
    InvalidRoi(String),

    /// Mask classes too small for contrast statistics.
    #[error("object mask needs at least 2 pixels in each class (in={inside}, out={outside})")]
    DegenerateMask { inside: usize, outside: usize },

    /// CNR denominator vanished.
    #[error("CNR undefined: zero variance in both pixel classes")]
    CnrUndefined,

    /// The HH+VV reference region carries no counts.
    #[error("reference photon count N_total is zero; no probabilities can be formed")]
    EmptyReference,

    /// Histogram requested over an empty S map.
    #[error("empty S map: no ROI pixel had a nonzero per-pixel total")]
    EmptySMap,

    /// Object geometry does not fit the grid.
    #[error("object geometry: {0}")]
    ObjectGeometry(String),

    /// Malformed object or image file.
    #[error("parse error in {path}: {reason}")]
    Parse { path: String, reason: String },

    /// Configuration file or override problem.
    #[error("config: {0}")]
    Config(String),

    /// Invalid detector parameter.
    #[error("detector config: {0}")]
    DetectorConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-parseable code, stable across releases; used by the CLI
    /// on its single-line error output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotNormalized { .. } => "not-normalized",
            Error::DegenerateState { .. } => "degenerate-state",
            Error::NotUnitPair { .. } => "not-unit-pair",
            Error::UnsupportedPhase { .. } => "unsupported-phase",
            Error::InvalidChannel(_) => "invalid-channel",
            Error::GridMismatch(_) => "grid-mismatch",
            Error::TruncationMismatch(_) => "truncation-mismatch",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::InvalidRoi(_) => "invalid-roi",
            Error::DegenerateMask { .. } => "degenerate-mask",
            Error::CnrUndefined => "cnr-undefined",
            Error::EmptyReference => "empty-reference",
            Error::EmptySMap => "empty-s-map",
            Error::ObjectGeometry(_) => "object-geometry",
            Error::Parse { .. } => "parse",
            Error::Config(_) => "config",
            Error::DetectorConfig(_) => "detector-config",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
