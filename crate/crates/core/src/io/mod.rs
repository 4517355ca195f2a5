//! File formats and experiment configuration.
//!
//! Images travel as ASCII portable graymaps (magic `P2`) with a text sidecar
//! carrying the float quantization scale; exact float tables use CSV with a
//! header row; configs and manifests are flat `key = value` text with dotted
//! sections.

pub mod config;
pub mod csvio;
pub mod load;
pub mod pgm;

pub use config::{DetectionMode, ExperimentConfig, ObjectSource, Preset, SpectrumModel};
pub use load::load_object;
