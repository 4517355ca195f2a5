//! Square sampling grid shared by mode fields, objects, and images.

use crate::error::{Error, Result};

/// Uniform n x n Cartesian grid centered on the optical axis.
///
/// Pixel centers sit at the midpoints `(i + 0.5) * pitch - half_extent`;
/// index convention is `[row, col]` with x increasing with the column
/// (rightward) and y increasing with the row (upward). All quadrature is the
/// midpoint rule with weight `pitch^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Pixels per side.
    pub n: usize,
    /// Physical half-width in mm.
    pub half_extent_mm: f64,
    /// LG beam waist in mm.
    pub waist_mm: f64,
}

impl GridSpec {
    pub fn new(n: usize, half_extent_mm: f64, waist_mm: f64) -> Result<Self> {
        if n < 8 {
            return Err(Error::Config(format!("grid.n = {n} must be >= 8")));
        }
        if !(half_extent_mm > 0.0) || !(waist_mm > 0.0) {
            return Err(Error::Config(format!(
                "grid half_extent ({half_extent_mm}) and waist ({waist_mm}) must be positive"
            )));
        }
        Ok(Self {
            n,
            half_extent_mm,
            waist_mm,
        })
    }

    /// Pixel pitch in mm.
    pub fn pitch_mm(&self) -> f64 {
        2.0 * self.half_extent_mm / self.n as f64
    }

    /// Quadrature weight per pixel (mm^2).
    pub fn pixel_area(&self) -> f64 {
        let p = self.pitch_mm();
        p * p
    }

    /// Physical coordinate of pixel center `i` along either axis (mm).
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.pitch_mm() - self.half_extent_mm
    }

    /// Half-open pixel-index range whose centers fall in `[lo_mm, hi_mm)`.
    ///
    /// Boundaries hitting a pixel center exactly include the lower edge and
    /// exclude the upper; a small epsilon in index units absorbs float noise
    /// so that physically exact geometry (e.g. 25 um features on a 25 um
    /// pitch) rasterizes to the exact pixel count.
    pub fn index_range(&self, lo_mm: f64, hi_mm: f64) -> (usize, usize) {
        const EPS: f64 = 1e-9;
        let pitch = self.pitch_mm();
        let to_index = |x_mm: f64| (x_mm + self.half_extent_mm) / pitch - 0.5;
        let start = (to_index(lo_mm) - EPS).ceil().max(0.0) as usize;
        let end = (to_index(hi_mm) - EPS).ceil().max(0.0) as usize;
        (start.min(self.n), end.min(self.n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn coordinates_are_centered() {
        let g = GridSpec::new(8, 1.0, 0.2).unwrap();
        assert_abs_diff_eq!(g.coord(0), -0.875, epsilon = 1e-15);
        assert_abs_diff_eq!(g.coord(7), 0.875, epsilon = 1e-15);
        assert_abs_diff_eq!(g.coord(3) + g.coord(4), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn odd_grid_has_exact_center() {
        let g = GridSpec::new(9, 1.0, 0.2).unwrap();
        assert_eq!(g.coord(4), 0.0);
    }

    #[test]
    fn index_range_exact_on_pitch_boundaries() {
        // 25 um pitch: n=256, half=3.2 mm; a 275 um interval covers 11 pixels
        let g = GridSpec::new(256, 3.2, 0.18).unwrap();
        let (a, b) = g.index_range(0.1375, 0.4125);
        assert_eq!((a, b), (133, 144));
        let (a, b) = g.index_range(-0.6375, 0.6375);
        assert_eq!(b - a, 51);
    }

    #[test]
    fn index_range_clamps_to_grid() {
        let g = GridSpec::new(16, 1.0, 0.2).unwrap();
        let (a, b) = g.index_range(-5.0, 5.0);
        assert_eq!((a, b), (0, 16));
        let (a, b) = g.index_range(2.0, 3.0);
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_tiny_or_nonpositive() {
        assert!(GridSpec::new(4, 1.0, 0.2).is_err());
        assert!(GridSpec::new(16, 0.0, 0.2).is_err());
        assert!(GridSpec::new(16, 1.0, -1.0).is_err());
    }
}
