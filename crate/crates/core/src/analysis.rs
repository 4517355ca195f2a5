//! Figures of merit: contrast-to-noise ratio, ROI photon sums, normalized
//! Hardy probabilities, the macroscopic S witness, per-pixel S_ij maps, and
//! their histogram.

use std::collections::BTreeSet;

use ndarray::Array2;

use crate::detector::GrayImage;
use crate::error::{Error, Result};
use crate::spatial::object::ObjectField;

/// Rectangular region of interest in pixel coordinates (x0 = column,
/// y0 = row of the lower-left corner in the y-up convention).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Roi {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl Roi {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidRoi("ROI must contain at least one pixel".into()));
        }
        if self.x0 + self.width > n || self.y0 + self.height > n {
            return Err(Error::InvalidRoi(format!(
                "ROI {self:?} exceeds the {n}x{n} image"
            )));
        }
        Ok(())
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// (row, col) pairs in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (self.y0..self.y0 + self.height)
            .flat_map(move |i| (self.x0..self.x0 + self.width).map(move |j| (i, j)))
    }
}

/// Ground-truth transmissive region: |psi| > 0.5.
#[derive(Debug, Clone)]
pub struct ObjectMask {
    pub inside: Array2<bool>,
}

impl ObjectMask {
    pub fn from_object(object: &ObjectField) -> Self {
        Self {
            inside: object.values.mapv(|c| c.norm() > 0.5),
        }
    }

    pub fn count_inside(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }
}

/// Contrast-to-noise ratio with the published plus-sign numerator:
/// (mean_in + mean_out) / sqrt(var_in + var_out), population variances.
///
/// The conventional difference-numerator variant is [`cnr_difference`]; the
/// two agree when the out-of-object mean is ~0.
pub fn cnr(values: &Array2<f64>, mask: &ObjectMask) -> Result<f64> {
    let (m_in, v_in, m_out, v_out) = class_stats(values, mask)?;
    let denom = v_in + v_out;
    if denom <= 0.0 {
        return Err(Error::CnrUndefined);
    }
    Ok((m_in + m_out) / denom.sqrt())
}

/// (mean_in - mean_out) / sqrt(var_in + var_out).
pub fn cnr_difference(values: &Array2<f64>, mask: &ObjectMask) -> Result<f64> {
    let (m_in, v_in, m_out, v_out) = class_stats(values, mask)?;
    let denom = v_in + v_out;
    if denom <= 0.0 {
        return Err(Error::CnrUndefined);
    }
    Ok((m_in - m_out) / denom.sqrt())
}

fn class_stats(values: &Array2<f64>, mask: &ObjectMask) -> Result<(f64, f64, f64, f64)> {
    if values.dim() != mask.inside.dim() {
        return Err(Error::DimensionMismatch {
            left: values.dim(),
            right: mask.inside.dim(),
        });
    }
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for (v, &m) in values.iter().zip(mask.inside.iter()) {
        if m {
            inside.push(*v);
        } else {
            outside.push(*v);
        }
    }
    if inside.len() < 2 || outside.len() < 2 {
        return Err(Error::DegenerateMask {
            inside: inside.len(),
            outside: outside.len(),
        });
    }
    Ok((
        mean(&inside),
        population_variance(&inside),
        mean(&outside),
        population_variance(&outside),
    ))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn population_variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}

/// Sum of gray values inside the ROI.
pub fn roi_sum(image: &GrayImage, roi: &Roi) -> Result<f64> {
    roi.validate(image.data.dim().0.min(image.data.dim().1))?;
    Ok(roi.pixels().map(|px| image.data[px]).sum())
}

/// One per-pixel Hardy witness value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SPixel {
    pub row: usize,
    pub col: usize,
    pub s: f64,
}

/// Macroscopic and per-pixel Hardy statistics over the ROI set.
#[derive(Debug, Clone)]
pub struct HardyReport {
    /// P(theta0, theta0): ROI sum of channel 1 over N_total.
    pub p_00: f64,
    /// P(theta0_bar, theta1).
    pub p_b01: f64,
    /// P(theta1, theta0_bar).
    pub p_1b0: f64,
    /// P(theta1, theta1).
    pub p_11: f64,
    /// p_11 - p_b01 - p_1b0 - p_00.
    pub s_value: f64,
    /// Per-pixel S_ij over ROI pixels with a nonzero per-pixel total.
    pub s_map: Vec<SPixel>,
    /// ROI pixels whose per-pixel HH+VV total was zero (excluded from s_map).
    pub zero_total: Vec<(usize, usize)>,
    /// Total number of (deduplicated) ROI pixels.
    pub roi_pixel_count: usize,
    /// #{S_ij > 0} / roi_pixel_count.
    pub positive_fraction: f64,
}

impl HardyReport {
    /// The all-pixels variant: zero-total pixels contribute S_ij = 0, so the
    /// map covers every ROI pixel.
    pub fn s_map_all_pixels(&self) -> Vec<SPixel> {
        let mut all: Vec<SPixel> = self.s_map.clone();
        all.extend(self.zero_total.iter().map(|&(row, col)| SPixel {
            row,
            col,
            s: 0.0,
        }));
        all.sort_by_key(|p| (p.row, p.col));
        all
    }
}

/// Computes the Hardy report from the four channel images, the HH and VV
/// reference images, and the ROI set (deduplicated union).
///
/// Macroscopic probabilities divide ROI channel sums by
/// N_total = N_ROI(H,H) + N_ROI(V,V); per-pixel probabilities divide by the
/// per-pixel total, excluding zero-total pixels from the map (they still
/// count in positive_fraction's denominator).
pub fn hardy_from_images(
    channels: &[GrayImage; 4],
    hh: &GrayImage,
    vv: &GrayImage,
    rois: &[Roi],
) -> Result<HardyReport> {
    let dim = channels[0].dim();
    for img in channels.iter().chain([hh, vv]) {
        if img.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: img.dim(),
            });
        }
    }
    if rois.is_empty() {
        return Err(Error::InvalidRoi("at least one ROI is required".into()));
    }
    let n = dim.0.min(dim.1);
    let mut pixels: BTreeSet<(usize, usize)> = BTreeSet::new();
    for roi in rois {
        roi.validate(n)?;
        pixels.extend(roi.pixels());
    }

    let mut n_total = 0.0;
    let mut channel_sums = [0.0f64; 4];
    for &px in &pixels {
        n_total += hh.data[px] + vv.data[px];
        for (k, ch) in channels.iter().enumerate() {
            channel_sums[k] += ch.data[px];
        }
    }
    if n_total <= 0.0 {
        return Err(Error::EmptyReference);
    }

    let p_00 = channel_sums[0] / n_total;
    let p_b01 = channel_sums[1] / n_total;
    let p_1b0 = channel_sums[2] / n_total;
    let p_11 = channel_sums[3] / n_total;

    let mut s_map = Vec::new();
    let mut zero_total = Vec::new();
    let mut positive = 0usize;
    for &(row, col) in &pixels {
        let tot = hh.data[(row, col)] + vv.data[(row, col)];
        if tot <= 0.0 {
            zero_total.push((row, col));
            continue;
        }
        let s = (channels[3].data[(row, col)]
            - channels[1].data[(row, col)]
            - channels[2].data[(row, col)]
            - channels[0].data[(row, col)])
            / tot;
        if s > 0.0 {
            positive += 1;
        }
        s_map.push(SPixel { row, col, s });
    }

    let roi_pixel_count = pixels.len();
    Ok(HardyReport {
        p_00,
        p_b01,
        p_1b0,
        p_11,
        s_value: p_11 - p_b01 - p_1b0 - p_00,
        s_map,
        zero_total,
        roi_pixel_count,
        positive_fraction: positive as f64 / roi_pixel_count as f64,
    })
}

/// Histogram of the per-pixel S values.
#[derive(Debug, Clone)]
pub struct Histogram {
    /// bins + 1 edges, ascending.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Bins the report's S map into `bins` equal-width bins spanning
/// [min(S), max(S)] (a degenerate span widens to +-0.5 around the value).
pub fn s_histogram(report: &HardyReport, bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::Config("histogram needs at least one bin".into()));
    }
    if report.s_map.is_empty() {
        return Err(Error::EmptySMap);
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in &report.s_map {
        lo = lo.min(p.s);
        hi = hi.max(p.s);
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| lo + i as f64 * width).collect();
    let mut counts = vec![0usize; bins];
    for p in &report.s_map {
        let idx = (((p.s - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Ok(Histogram { edges, counts })
}
