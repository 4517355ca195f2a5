//! Object loading: P2 graymaps as real transmission, CSV as complex fields,
//! nearest-neighbor resampling onto the working grid.

use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;

use super::csvio::read_complex_field;
use super::pgm::read_pgm;
use crate::error::{Error, Result};
use crate::spatial::{GridSpec, ObjectField};

/// Loads an object file onto `grid`.
///
/// `.pgm` files are ASCII P2 and map linearly to transmission in [0, 1]
/// (value / maxval); anything else is read as a `row,col,re,im` CSV complex
/// field. The source is resampled to the grid by nearest neighbor.
pub fn load_object(path: &Path, grid: &GridSpec) -> Result<ObjectField> {
    let is_pgm = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.eq_ignore_ascii_case("pgm") || e.eq_ignore_ascii_case("p2"))
        .unwrap_or(false);
    let source: Array2<Complex64> = if is_pgm {
        let pgm = read_pgm(path)?;
        let max = pgm.maxval as f64;
        pgm.data.mapv(|v| Complex64::new(v as f64 / max, 0.0))
    } else {
        read_complex_field(path)?
    };
    let (rows, cols) = source.dim();
    if rows != cols {
        return Err(Error::Parse {
            path: path.display().to_string(),
            reason: format!("object must be square, got {rows}x{cols}"),
        });
    }
    ObjectField::new(*grid, resample_nearest(&source, grid.n))
}

/// Nearest-neighbor resampling of a square field to side `n`.
fn resample_nearest(source: &Array2<Complex64>, n: usize) -> Array2<Complex64> {
    let m = source.dim().0;
    Array2::from_shape_fn((n, n), |(i, j)| {
        let si = (((i as f64 + 0.5) * m as f64 / n as f64) as usize).min(m - 1);
        let sj = (((j as f64 + 0.5) * m as f64 / n as f64) as usize).min(m - 1);
        source[(si, sj)]
    })
}
