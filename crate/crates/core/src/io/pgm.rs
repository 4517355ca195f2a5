//! ASCII portable graymap (P2) reading and writing.
//!
//! P2 stores integers, so float images are quantized against their maximum;
//! the scale (gray value per integer step) goes to a `.scale.txt` sidecar and
//! is reapplied on load. Files are written row-per-line from the top of the
//! image (max y first), matching the usual raster order while the in-memory
//! convention keeps y increasing with the row index.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::detector::{GrayImage, Provenance};
use crate::error::{Error, Result};

/// Integer range used when writing gray images.
pub const PGM_MAXVAL: u32 = 65535;

/// A parsed P2 file: integer samples and the declared maximum value.
#[derive(Debug, Clone)]
pub struct Pgm {
    pub data: Array2<u32>,
    pub maxval: u32,
}

/// Writes integer samples as P2, top row first.
pub fn write_pgm(path: &Path, data: &Array2<u32>, maxval: u32) -> Result<()> {
    let (rows, cols) = data.dim();
    let mut out = String::new();
    out.push_str("P2\n");
    out.push_str(&format!("{cols} {rows}\n{maxval}\n"));
    for i in (0..rows).rev() {
        let mut line = String::new();
        for j in 0..cols {
            if j > 0 {
                line.push(' ');
            }
            line.push_str(&data[(i, j)].to_string());
        }
        out.push_str(&line);
        out.push('\n');
    }
    let mut f = fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

/// Parses a P2 file (comments and arbitrary whitespace allowed).
pub fn read_pgm(path: &Path) -> Result<Pgm> {
    let text = fs::read_to_string(path)?;
    let perr = |reason: &str| Error::Parse {
        path: path.display().to_string(),
        reason: reason.into(),
    };
    let mut tokens = text.lines().flat_map(|line| {
        let body = line.split('#').next().unwrap_or("");
        body.split_whitespace()
    });
    if tokens.next() != Some("P2") {
        return Err(perr("missing P2 magic"));
    }
    let mut next_int = |what: &str| -> Result<u32> {
        tokens
            .next()
            .ok_or_else(|| perr(&format!("missing {what}")))?
            .parse::<u32>()
            .map_err(|_| perr(&format!("non-integer {what}")))
    };
    let cols = next_int("width")? as usize;
    let rows = next_int("height")? as usize;
    let maxval = next_int("maxval")?;
    if cols == 0 || rows == 0 || maxval == 0 {
        return Err(perr("degenerate dimensions"));
    }
    let mut values = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let v = next_int("pixel")?;
        if v > maxval {
            return Err(perr(&format!("pixel {v} exceeds maxval {maxval}")));
        }
        values.push(v);
    }
    if tokens.next().is_some() {
        return Err(perr("trailing data after pixels"));
    }
    // file is top row first; flip back to y-up row order
    let mut data = Array2::zeros((rows, cols));
    for (k, v) in values.into_iter().enumerate() {
        let file_row = k / cols;
        let col = k % cols;
        data[(rows - 1 - file_row, col)] = v;
    }
    Ok(Pgm { data, maxval })
}

/// Sidecar path for `foo.pgm` -> `foo.scale.txt`.
pub fn sidecar_path(pgm_path: &Path) -> PathBuf {
    pgm_path.with_extension("scale.txt")
}

/// Writes a gray image as quantized P2 plus its float-scale sidecar.
pub fn write_gray_image(pgm_path: &Path, image: &GrayImage) -> Result<()> {
    let max = image.data.iter().copied().fold(0.0f64, f64::max);
    let scale = if max > 0.0 {
        max / PGM_MAXVAL as f64
    } else {
        1.0
    };
    let ints = image.data.mapv(|v| ((v / scale).round() as u32).min(PGM_MAXVAL));
    write_pgm(pgm_path, &ints, PGM_MAXVAL)?;
    fs::write(sidecar_path(pgm_path), format!("scale = {scale}\n"))?;
    Ok(())
}

/// Loads a gray image written by [`write_gray_image`]; a missing sidecar
/// means scale 1.
pub fn read_gray_image(pgm_path: &Path) -> Result<GrayImage> {
    let pgm = read_pgm(pgm_path)?;
    let sidecar = sidecar_path(pgm_path);
    let scale = if sidecar.exists() {
        parse_scale(&sidecar)?
    } else {
        1.0
    };
    Ok(GrayImage {
        data: pgm.data.mapv(|v| v as f64 * scale),
        provenance: Provenance::Subtracted,
    })
}

fn parse_scale(path: &Path) -> Result<f64> {
    let text = fs::read_to_string(path)?;
    for line in text.lines() {
        if let Some((key, value)) = line.split_once('=') {
            if key.trim() == "scale" {
                return value.trim().parse::<f64>().map_err(|_| Error::Parse {
                    path: path.display().to_string(),
                    reason: "bad scale value".into(),
                });
            }
        }
    }
    Err(Error::Parse {
        path: path.display().to_string(),
        reason: "no scale line".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn pgm_round_trip_preserves_orientation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.pgm");
        let data = array![[0u32, 1, 2], [10, 11, 12], [20, 21, 22]];
        write_pgm(&path, &data, 255).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        // first pixel line is the highest row (y-up storage, raster file)
        let pixel_lines: Vec<&str> = text.lines().skip(3).collect();
        assert_eq!(pixel_lines, ["20 21 22", "10 11 12", "0 1 2"]);
        let back = read_pgm(&path).unwrap();
        assert_eq!(back.data, data);
        assert_eq!(back.maxval, 255);
    }

    #[test]
    fn gray_image_round_trip_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gray.pgm");
        let img = GrayImage {
            data: array![[0.0, 0.37], [251.2, 2500.0]],
            provenance: Provenance::Raw,
        };
        write_gray_image(&path, &img).unwrap();
        let back = read_gray_image(&path).unwrap();
        let step = 2500.0 / PGM_MAXVAL as f64;
        for (a, b) in back.data.iter().zip(img.data.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 0.5001 * step);
        }
    }

    #[test]
    fn zero_image_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("zero.pgm");
        let img = GrayImage {
            data: Array2::zeros((3, 3)),
            provenance: Provenance::Raw,
        };
        write_gray_image(&path, &img).unwrap();
        let back = read_gray_image(&path).unwrap();
        assert!(back.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn comments_and_whitespace_tolerated() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.pgm");
        fs::write(&path, "P2 # magic\n# a comment line\n2 2\n255\n0 255\n7 9\n").unwrap();
        let pgm = read_pgm(&path).unwrap();
        assert_eq!(pgm.data[(1, 0)], 0); // first file row is the top (y max)
        assert_eq!(pgm.data[(1, 1)], 255);
        assert_eq!(pgm.data[(0, 0)], 7);
    }

    #[test]
    fn malformed_files_rejected() {
        let dir = tempfile::tempdir().unwrap();
        for (name, body) in [
            ("bad_magic.pgm", "P5\n2 2\n255\n0 0 0 0\n"),
            ("short.pgm", "P2\n2 2\n255\n0 0 0\n"),
            ("long.pgm", "P2\n2 2\n255\n0 0 0 0 0\n"),
            ("over.pgm", "P2\n2 2\n10\n0 0 0 11\n"),
        ] {
            let path = dir.path().join(name);
            fs::write(&path, body).unwrap();
            assert!(read_pgm(&path).is_err(), "{name} should fail");
        }
    }
}
