//! CSV artifacts: exact-float tables with a header row.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;

use crate::analysis::{Histogram, SPixel};
use crate::error::{Error, Result};

/// Writes the per-pixel S map as `row,col,s`.
pub fn write_s_map(path: &Path, s_map: &[SPixel]) -> Result<()> {
    let mut out = String::from("row,col,s\n");
    for p in s_map {
        out.push_str(&format!("{},{},{}\n", p.row, p.col, p.s));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes histogram bins as `bin_lo,bin_hi,count`.
pub fn write_histogram(path: &Path, h: &Histogram) -> Result<()> {
    let mut out = String::from("bin_lo,bin_hi,count\n");
    for (i, count) in h.counts.iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", h.edges[i], h.edges[i + 1], count));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes the CNR table as `channel,cnr` (undefined entries print `nan`).
pub fn write_cnr_table(path: &Path, rows: &[(&str, Option<f64>)]) -> Result<()> {
    let mut out = String::from("channel,cnr\n");
    for (name, value) in rows {
        match value {
            Some(v) => out.push_str(&format!("{name},{v}\n")),
            None => out.push_str(&format!("{name},nan\n")),
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes a complex field as `row,col,re,im`, one line per pixel.
pub fn write_complex_field(path: &Path, values: &Array2<Complex64>) -> Result<()> {
    let (rows, cols) = values.dim();
    let mut out = String::from("row,col,re,im\n");
    for i in 0..rows {
        for j in 0..cols {
            let v = values[(i, j)];
            out.push_str(&format!("{i},{j},{},{}\n", v.re, v.im));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a complex field written as `row,col,re,im`; the grid side is
/// `max(row, col) + 1` and unlisted pixels are zero.
pub fn read_complex_field(path: &Path) -> Result<Array2<Complex64>> {
    let text = fs::read_to_string(path)?;
    let perr = |reason: String| Error::Parse {
        path: path.display().to_string(),
        reason,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| perr("empty file".into()))?;
    if header.trim() != "row,col,re,im" {
        return Err(perr(format!("expected header row,col,re,im; got `{header}`")));
    }
    let mut entries: Vec<(usize, usize, Complex64)> = Vec::new();
    let mut side = 0usize;
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(perr(format!("line {}: expected 4 fields", lineno + 2)));
        }
        let row: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| perr(format!("line {}: bad row", lineno + 2)))?;
        let col: usize = fields[1]
            .trim()
            .parse()
            .map_err(|_| perr(format!("line {}: bad col", lineno + 2)))?;
        let re: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| perr(format!("line {}: bad re", lineno + 2)))?;
        let im: f64 = fields[3]
            .trim()
            .parse()
            .map_err(|_| perr(format!("line {}: bad im", lineno + 2)))?;
        side = side.max(row + 1).max(col + 1);
        entries.push((row, col, Complex64::new(re, im)));
    }
    if side == 0 {
        return Err(perr("no pixels".into()));
    }
    let mut values = Array2::from_elem((side, side), Complex64::ZERO);
    for (row, col, v) in entries {
        values[(row, col)] = v;
    }
    Ok(values)
}
