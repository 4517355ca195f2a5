//! Complex transmission objects and the built-in double-slit generator.

use ndarray::Array2;
use num_complex::Complex64;

use super::grid::GridSpec;
use crate::analysis::Roi;
use crate::error::{Error, Result};

/// Slack on the passive-transmission bound |psi| <= 1.
const TRANSMISSION_TOL: f64 = 1e-9;

/// A complex transmission function sampled on a grid.
#[derive(Debug, Clone)]
pub struct ObjectField {
    pub grid: GridSpec,
    pub values: Array2<Complex64>,
}

impl ObjectField {
    /// Validates dimensions and the passive bound |values| <= 1.
    pub fn new(grid: GridSpec, values: Array2<Complex64>) -> Result<Self> {
        if values.dim() != (grid.n, grid.n) {
            return Err(Error::GridMismatch(format!(
                "object is {:?}, grid is {n}x{n}",
                values.dim(),
                n = grid.n
            )));
        }
        if let Some(c) = values.iter().find(|c| c.norm() > 1.0 + TRANSMISSION_TOL) {
            return Err(Error::ObjectGeometry(format!(
                "transmission magnitude {} exceeds 1",
                c.norm()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Quadrature energy integral of |psi|^2 (mm^2 units).
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.pixel_area()
    }

    pub fn is_empty(&self) -> bool {
        self.values.iter().all(|c| c.norm_sqr() == 0.0)
    }

    /// Pointwise complex conjugate (the phase-conjugation of the signal-arm
    /// projection).
    pub fn conjugate(&self) -> Self {
        Self {
            grid: self.grid,
            values: self.values.mapv(|c| c.conj()),
        }
    }
}

/// Geometry of the built-in double slit, in micrometers.
///
/// `separation_um` is the gap between the inner slit edges; the pair is
/// centered on the optical axis. The defaults rasterize to two 11 x 51 pixel
/// bars on a 25 um pitch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleSlitSpec {
    pub slit_width_um: f64,
    pub slit_height_um: f64,
    pub separation_um: f64,
}

impl Default for DoubleSlitSpec {
    fn default() -> Self {
        Self {
            slit_width_um: 275.0,
            slit_height_um: 1275.0,
            separation_um: 275.0,
        }
    }
}

/// A generated double slit: binary transmission plus the matching ROI pair.
#[derive(Debug, Clone)]
pub struct DoubleSlit {
    pub object: ObjectField,
    pub rois: [Roi; 2],
    /// True when the separation is zero and the two slits merged.
    pub merged: bool,
}

/// Rasterizes a centered double slit onto `grid` and emits the ROI pair
/// covering the two openings.
pub fn make_double_slit(grid: &GridSpec, spec: DoubleSlitSpec) -> Result<DoubleSlit> {
    if !(spec.slit_width_um > 0.0) || !(spec.slit_height_um > 0.0) {
        return Err(Error::ObjectGeometry(
            "slit width and height must be positive".into(),
        ));
    }
    if spec.separation_um < 0.0 {
        return Err(Error::ObjectGeometry(
            "slit separation must be nonnegative".into(),
        ));
    }
    let w = spec.slit_width_um / 1000.0;
    let h = spec.slit_height_um / 1000.0;
    let gap = spec.separation_um / 1000.0;
    let outer = gap / 2.0 + w;
    if outer > grid.half_extent_mm || h / 2.0 > grid.half_extent_mm {
        return Err(Error::ObjectGeometry(format!(
            "slit pattern ({:.3} x {:.3} mm) exceeds the field of view ({:.3} mm half extent)",
            2.0 * outer,
            h,
            grid.half_extent_mm
        )));
    }

    let (y0, y1) = grid.index_range(-h / 2.0, h / 2.0);
    let (lx0, lx1) = grid.index_range(-outer, -gap / 2.0);
    let (rx0, rx1) = grid.index_range(gap / 2.0, gap / 2.0 + w);

    let mut values = Array2::from_elem((grid.n, grid.n), Complex64::ZERO);
    for i in y0..y1 {
        for j in lx0..lx1 {
            values[(i, j)] = Complex64::ONE;
        }
        for j in rx0..rx1 {
            values[(i, j)] = Complex64::ONE;
        }
    }

    let roi = |x0: usize, x1: usize| Roi {
        x0,
        y0,
        width: x1 - x0,
        height: y1 - y0,
    };
    Ok(DoubleSlit {
        object: ObjectField::new(*grid, values)?,
        rois: [roi(lx0, lx1), roi(rx0, rx1)],
        merged: spec.separation_um == 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_grid() -> GridSpec {
        // 25 um per pixel, as in the reported ROI geometry
        GridSpec::new(256, 3.2, 0.18).unwrap()
    }

    #[test]
    fn default_slits_are_11_by_51_at_25um() {
        let ds = make_double_slit(&paper_grid(), DoubleSlitSpec::default()).unwrap();
        for roi in &ds.rois {
            assert_eq!((roi.width, roi.height), (11, 51));
        }
        let lit = ds
            .object
            .values
            .iter()
            .filter(|c| c.norm_sqr() > 0.0)
            .count();
        assert_eq!(lit, 2 * 11 * 51); // 1122 transmissive pixels
        assert!(!ds.merged);
    }

    #[test]
    fn small_grid_at_same_pitch_matches() {
        let g = GridSpec::new(72, 0.9, 0.18).unwrap();
        let ds = make_double_slit(&g, DoubleSlitSpec::default()).unwrap();
        for roi in &ds.rois {
            assert_eq!((roi.width, roi.height), (11, 51));
        }
    }

    #[test]
    fn rois_cover_exactly_the_transmissive_pixels() {
        let ds = make_double_slit(&paper_grid(), DoubleSlitSpec::default()).unwrap();
        let mut marked = Array2::from_elem(ds.object.values.dim(), false);
        for roi in &ds.rois {
            for i in roi.y0..roi.y0 + roi.height {
                for j in roi.x0..roi.x0 + roi.width {
                    marked[(i, j)] = true;
                }
            }
        }
        for ((i, j), v) in ds.object.values.indexed_iter() {
            assert_eq!(v.norm_sqr() > 0.0, marked[(i, j)], "pixel ({i},{j})");
        }
    }

    #[test]
    fn zero_separation_merges_with_flag() {
        let spec = DoubleSlitSpec {
            separation_um: 0.0,
            ..Default::default()
        };
        let ds = make_double_slit(&paper_grid(), spec).unwrap();
        assert!(ds.merged);
        let lit = ds
            .object
            .values
            .iter()
            .filter(|c| c.norm_sqr() > 0.0)
            .count();
        assert_eq!(lit, 2 * 11 * 51); // same area, contiguous
    }

    #[test]
    fn oversized_slit_rejected() {
        let spec = DoubleSlitSpec {
            slit_width_um: 10_000.0,
            ..Default::default()
        };
        assert!(matches!(
            make_double_slit(&paper_grid(), spec),
            Err(Error::ObjectGeometry(_))
        ));
    }

    #[test]
    fn transmission_bound_enforced() {
        let g = GridSpec::new(8, 1.0, 0.2).unwrap();
        let mut values = Array2::from_elem((8, 8), Complex64::ZERO);
        values[(0, 0)] = Complex64::new(1.5, 0.0);
        assert!(ObjectField::new(g, values).is_err());
    }
}
