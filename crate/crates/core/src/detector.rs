//! Heralded-ICCD acquisition model.
//!
//! Each frame, each pixel draws a Poisson event count at its per-frame rate
//! and is thresholded to a binary detection; frames accumulate into the gray
//! value ("relative photon count"). The thresholded draw is realized as a
//! Bernoulli with the exact Poisson tail probability, one uniform per
//! (frame, pixel) from the counter-based stream, so acquisition is
//! deterministic and schedule-invariant.

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{derive_stream, event_uniform};

/// Quantile above which pixels count as strong-exposure and are replaced by
/// the local 3x3 median during background subtraction.
pub const SATURATION_QUANTILE: f64 = 0.999;

/// Acquisition parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Accumulated frames per image.
    pub frames: u32,
    /// Exposure per frame in seconds (metadata; rates are per frame).
    pub exposure_s: f64,
    /// Expected signal events per frame at the brightest reference pixel.
    pub flux_scale: f64,
    /// Expected dark events per pixel per frame.
    pub dark_rate: f64,
    /// Per-frame event count at or above which a pixel registers 1.
    pub threshold: u32,
    /// Stream seed; equal seeds give bit-identical images.
    pub seed: u64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            frames: 2500,
            exposure_s: 5.0,
            flux_scale: 0.3,
            dark_rate: 1e-5,
            threshold: 1,
            seed: 1,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 {
            return Err(Error::DetectorConfig("frames must be >= 1".into()));
        }
        if !(self.exposure_s > 0.0) {
            return Err(Error::DetectorConfig("exposure_s must be positive".into()));
        }
        if !(self.flux_scale > 0.0) {
            return Err(Error::DetectorConfig("flux_scale must be positive".into()));
        }
        if !(self.dark_rate >= 0.0) {
            return Err(Error::DetectorConfig("dark_rate must be nonnegative".into()));
        }
        if self.threshold == 0 {
            return Err(Error::DetectorConfig("threshold must be >= 1".into()));
        }
        Ok(())
    }

    /// Same parameters on an independent random stream; used to give each
    /// image of a multi-image run its own events.
    pub fn with_stream(&self, tag: u64) -> Self {
        Self {
            seed: derive_stream(self.seed, tag),
            ..*self
        }
    }
}

/// How a gray image was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Raw,
    Background,
    Subtracted,
}

/// Accumulated relative photon counts I_ij (nonnegative).
#[derive(Debug, Clone)]
pub struct GrayImage {
    pub data: Array2<f64>,
    pub provenance: Provenance,
}

impl GrayImage {
    pub fn dim(&self) -> (usize, usize) {
        self.data.dim()
    }
}

/// P(Poisson(mu) >= threshold): the per-frame firing probability.
pub fn fire_probability(mu: f64, threshold: u32) -> f64 {
    if mu <= 0.0 {
        return 0.0;
    }
    // 1 - CDF(threshold - 1) via the stable term recurrence
    let mut term = (-mu).exp();
    let mut cdf = term;
    for j in 1..threshold {
        term *= mu / j as f64;
        cdf += term;
    }
    (1.0 - cdf).max(0.0)
}

/// Acquires an image whose per-frame signal rates are
/// `rate_map * flux_scale / reference_max + dark_rate`.
///
/// `reference_max` is the rate-map value mapped to `flux_scale`; passing the
/// map's own maximum gives the plain single-image contract, while a shared
/// reference (e.g. the HH+VV map maximum) preserves cross-channel ratios.
pub fn simulate_acquisition_scaled(
    rate_map: &Array2<f64>,
    reference_max: f64,
    config: &DetectorConfig,
) -> Result<GrayImage> {
    config.validate()?;
    if rate_map.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::DetectorConfig(
            "rate map must be finite and nonnegative".into(),
        ));
    }
    let scale = if reference_max > 0.0 {
        config.flux_scale / reference_max
    } else {
        0.0
    };
    let fire: Vec<f64> = rate_map
        .iter()
        .map(|&r| fire_probability(r * scale + config.dark_rate, config.threshold))
        .collect();
    let frames = config.frames as u64;
    let seed = config.seed;
    let counts: Vec<f64> = fire
        .par_iter()
        .enumerate()
        .map(|(pixel, &p)| {
            if p <= 0.0 {
                return 0.0;
            }
            let mut hits = 0u32;
            for frame in 0..frames {
                if event_uniform(seed, frame, pixel as u64) < p {
                    hits += 1;
                }
            }
            hits as f64
        })
        .collect();
    let data = Array2::from_shape_vec(rate_map.dim(), counts).expect("same length");
    Ok(GrayImage {
        data,
        provenance: Provenance::Raw,
    })
}

/// Single-image acquisition: the brightest rate-map pixel receives
/// `flux_scale` expected signal events per frame.
pub fn simulate_acquisition(rate_map: &Array2<f64>, config: &DetectorConfig) -> Result<GrayImage> {
    let max = rate_map.iter().copied().fold(0.0f64, f64::max);
    simulate_acquisition_scaled(rate_map, max, config)
}

/// Dark-only acquisition (the incorrect-gate-delay background measurement):
/// an n x n zero rate map under the same detector parameters.
pub fn background_image(n: usize, config: &DetectorConfig) -> Result<GrayImage> {
    let zero = Array2::zeros((n, n));
    let mut img = simulate_acquisition_scaled(&zero, 0.0, config)?;
    img.provenance = Provenance::Background;
    Ok(img)
}

/// Pixel-wise `raw - bg` clamped at zero, with strong-exposure pixels (above
/// the [`SATURATION_QUANTILE`] of the clamped difference) replaced by their
/// local 3x3 median.
pub fn subtract_background(raw: &GrayImage, bg: &GrayImage) -> Result<GrayImage> {
    subtract_background_with(raw, bg, SATURATION_QUANTILE)
}

/// [`subtract_background`] with an explicit saturation quantile in (0, 1].
pub fn subtract_background_with(
    raw: &GrayImage,
    bg: &GrayImage,
    saturation_quantile: f64,
) -> Result<GrayImage> {
    if raw.dim() != bg.dim() {
        return Err(Error::DimensionMismatch {
            left: raw.dim(),
            right: bg.dim(),
        });
    }
    if !(saturation_quantile > 0.0 && saturation_quantile <= 1.0) {
        return Err(Error::DetectorConfig(format!(
            "saturation quantile {saturation_quantile} outside (0, 1]"
        )));
    }
    let mut sub = Array2::zeros(raw.dim());
    ndarray::Zip::from(&mut sub)
        .and(&raw.data)
        .and(&bg.data)
        .for_each(|s, &r, &b| *s = (r - b).max(0.0));

    let q = quantile(sub.as_slice().expect("standard layout"), saturation_quantile);
    let (rows, cols) = sub.dim();
    let mut replacements = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            if sub[(i, j)] > q {
                replacements.push(((i, j), local_median(&sub, i, j)));
            }
        }
    }
    for ((i, j), m) in replacements {
        sub[(i, j)] = m;
    }
    Ok(GrayImage {
        data: sub,
        provenance: Provenance::Subtracted,
    })
}

/// Type-1 (order statistic) quantile: the value at rank ceil(q N) in the
/// sorted sample.
fn quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite gray values"));
    let rank = ((sorted.len() as f64 * q).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Median of the 3x3 neighborhood clipped at the borders (upper-middle
/// element for even window sizes).
fn local_median(img: &Array2<f64>, i: usize, j: usize) -> f64 {
    let (rows, cols) = img.dim();
    let mut window = Vec::with_capacity(9);
    for di in -1i64..=1 {
        for dj in -1i64..=1 {
            let r = i as i64 + di;
            let c = j as i64 + dj;
            if r >= 0 && r < rows as i64 && c >= 0 && c < cols as i64 {
                window.push(img[(r as usize, c as usize)]);
            }
        }
    }
    window.sort_by(|a, b| a.partial_cmp(b).expect("finite gray values"));
    window[window.len() / 2]
}
