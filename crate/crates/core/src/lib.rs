//! Desk-scale simulator for hyper-entangled (polarization x spatial-mode)
//! two-photon ghost imaging arranged as a Hardy nonlocality test.
//!
//! The crate models the full chain: a non-maximally entangled polarization
//! state encodes four imaging channels on the logical structure of Hardy's
//! paradox, while Laguerre-Gaussian spatial entanglement carries the ghost
//! image of a transmission object. A thresholded-Poisson ICCD model turns
//! channel intensities into accumulated gray images, and the analysis layer
//! reproduces the published figures of merit (CNR, ROI photon sums, the
//! macroscopic S witness and its per-pixel map).
//!
//! Modules:
//! - [`polarization`]: two-qubit states, Hardy angles, probabilities, optimizer
//! - [`spatial`]: LG basis, object decomposition, Schmidt projection, channel images
//! - [`detector`]: heralded-ICCD Monte Carlo acquisition and background handling
//! - [`analysis`]: CNR, ROI sums, Hardy reports, histograms
//! - [`io`]: portable graymap + CSV artifacts, experiment configs
//! - [`pipeline`]: calibrate -> image -> acquire -> analyze orchestration

pub mod analysis;
pub mod detector;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod polarization;
pub mod rng;
pub mod spatial;

pub use error::{Error, Result};
pub use polarization::{
    hardy_probability, joint_probability, optimize_hardy, solve_hardy_angles, HardyAngles,
    MeasurementSetting, PolarizationState,
};
pub use spatial::{GridSpec, LGIndex, ObjectField, SchmidtSpectrum, Truncation};
