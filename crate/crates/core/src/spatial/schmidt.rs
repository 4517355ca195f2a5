//! Schmidt spectrum of the biphoton spatial state.
//!
//! The correlation amplitudes are modeled diagonal with OAM anticorrelation
//! and radial correlation: C^{l_s, l_i}_{p_s, p_i} =
//! lambda_{l,p} delta_{l_s, -l_i} delta_{p_s, p_i}. The weights are a model
//! parameter, not a measured quantity; two built-in families are provided.

use super::decomposition::Truncation;
use super::lg::LGIndex;
use crate::error::{Error, Result};

/// Normalization tolerance on Sigma lambda^2.
pub const SPECTRUM_NORM_TOL: f64 = 1e-12;

/// Nonnegative Schmidt amplitudes lambda_{l,p} over a truncation,
/// normalized so Sigma lambda^2 = 1.
#[derive(Debug, Clone)]
pub struct SchmidtSpectrum {
    truncation: Truncation,
    lambda: Vec<f64>,
}

impl SchmidtSpectrum {
    /// Uniform weights over the whole truncation (the identity imaging
    /// channel up to a global constant).
    pub fn flat(truncation: Truncation) -> Self {
        let count = truncation.mode_count();
        let v = (1.0 / count as f64).sqrt();
        Self {
            truncation,
            lambda: vec![v; count],
        }
    }

    /// Gaussian azimuthal envelope times geometric radial damping:
    /// lambda ~ exp(-l^2 / (2 sigma_ell^2)) * p_ratio^p.
    pub fn gaussian_geometric(truncation: Truncation, sigma_ell: f64, p_ratio: f64) -> Result<Self> {
        if !(sigma_ell > 0.0) {
            return Err(Error::Config(format!(
                "spectrum.sigma_ell = {sigma_ell} must be positive"
            )));
        }
        if !(p_ratio > 0.0 && p_ratio <= 1.0) {
            return Err(Error::Config(format!(
                "spectrum.p_ratio = {p_ratio} must lie in (0, 1]"
            )));
        }
        let weights: Vec<f64> = truncation
            .indices()
            .map(|idx| {
                let l = idx.ell as f64;
                (-l * l / (2.0 * sigma_ell * sigma_ell)).exp() * p_ratio.powi(idx.p as i32)
            })
            .collect();
        Self::from_weights(truncation, weights)
    }

    /// Normalizes arbitrary nonnegative weights.
    pub fn from_weights(truncation: Truncation, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != truncation.mode_count() {
            return Err(Error::TruncationMismatch(format!(
                "{} weights for {} modes",
                weights.len(),
                truncation.mode_count()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Config(
                "Schmidt weights must be finite and nonnegative".into(),
            ));
        }
        let norm2: f64 = weights.iter().map(|w| w * w).sum();
        if norm2 <= 0.0 {
            return Err(Error::Config("Schmidt spectrum is identically zero".into()));
        }
        let inv = norm2.sqrt().recip();
        Ok(Self {
            truncation,
            lambda: weights.into_iter().map(|w| w * inv).collect(),
        })
    }

    /// Spectrum concentrated on a single mode pair.
    pub fn single_mode(truncation: Truncation, index: LGIndex) -> Result<Self> {
        if !truncation.contains(index) {
            return Err(Error::TruncationMismatch(format!(
                "mode {index:?} outside truncation {truncation:?}"
            )));
        }
        let weights: Vec<f64> = truncation
            .indices()
            .map(|idx| if idx == index { 1.0 } else { 0.0 })
            .collect();
        Self::from_weights(truncation, weights)
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    /// lambda at (l, p); None outside the truncation.
    pub fn amplitude(&self, index: LGIndex) -> Option<f64> {
        self.truncation
            .indices()
            .position(|i| i == index)
            .map(|o| self.lambda[o])
    }

    pub fn iter(&self) -> impl Iterator<Item = (LGIndex, f64)> + '_ {
        self.truncation.indices().zip(self.lambda.iter().copied())
    }

    /// Sigma lambda^2, which is 1 after construction.
    pub fn norm_sqr(&self) -> f64 {
        self.lambda.iter().map(|l| l * l).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn flat_is_normalized() {
        let s = SchmidtSpectrum::flat(Truncation::new(10, 6));
        assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = SPECTRUM_NORM_TOL);
    }

    #[test]
    fn gaussian_geometric_is_normalized_and_even_in_ell() {
        let t = Truncation::new(6, 4);
        let s = SchmidtSpectrum::gaussian_geometric(t, 3.0, 0.8).unwrap();
        assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = SPECTRUM_NORM_TOL);
        for p in 0..=4 {
            for l in 1..=6 {
                let a = s.amplitude(LGIndex::new(l, p)).unwrap();
                let b = s.amplitude(LGIndex::new(-l, p)).unwrap();
                assert_abs_diff_eq!(a, b, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        let t = Truncation::new(2, 2);
        assert!(SchmidtSpectrum::gaussian_geometric(t, 0.0, 0.5).is_err());
        assert!(SchmidtSpectrum::gaussian_geometric(t, 2.0, 1.5).is_err());
        assert!(SchmidtSpectrum::from_weights(t, vec![0.0; t.mode_count()]).is_err());
        assert!(SchmidtSpectrum::from_weights(t, vec![1.0; 3]).is_err());
    }
}
