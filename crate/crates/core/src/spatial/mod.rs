//! Transverse spatial-mode machinery: the Laguerre-Gaussian basis, object
//! decomposition, the Schmidt-spectrum projection that forms the ghost image,
//! and per-channel image synthesis.

pub mod decomposition;
pub mod ghost;
pub mod grid;
pub mod lg;
pub mod object;
pub mod schmidt;

pub use decomposition::{decompose_object, ModeDecomposition, Truncation};
pub use ghost::{channel_image, ghost_intensity, idler_state};
pub use grid::GridSpec;
pub use lg::{lg_mode_field, LGIndex, ModeField};
pub use object::{make_double_slit, DoubleSlit, DoubleSlitSpec, ObjectField};
pub use schmidt::SchmidtSpectrum;
