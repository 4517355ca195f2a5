//! Laguerre-Gaussian mode fields at the waist plane.
//!
//! The normalized profile is
//!
//! ```text
//! LG_{l,p}(r, phi) = sqrt(2 p! / (pi (p+|l|)!)) / w
//!                    * (sqrt(2) r / w)^{|l|} L_p^{|l|}(2 r^2 / w^2)
//!                    * exp(-r^2 / w^2) * exp(i l phi)
//! ```
//!
//! so that the continuum L2 norm is 1. On the discrete grid the midpoint-rule
//! norm matches to quadrature accuracy as long as the mode fits the field of
//! view; a mode that spills carries a warning flag instead of erroring.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use super::grid::GridSpec;

/// Azimuthal / radial index pair of an LG mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LGIndex {
    /// Azimuthal index (orbital angular momentum), may be negative.
    pub ell: i32,
    /// Radial index, nonnegative.
    pub p: u32,
}

impl LGIndex {
    pub fn new(ell: i32, p: u32) -> Self {
        Self { ell, p }
    }
}

/// A sampled mode field together with its grid-norm diagnostics.
#[derive(Debug, Clone)]
pub struct ModeField {
    pub index: LGIndex,
    pub field: Array2<Complex64>,
    /// |grid norm^2 - 1|.
    pub norm_deficit: f64,
    /// True when the norm deficit exceeds 1%: the mode spills the grid.
    pub spills: bool,
}

/// Norm deficit above which a mode counts as spilling the field of view.
pub const SPILL_DEFICIT: f64 = 0.01;

/// sqrt(2 p! / (pi (p+a)!)) / w without forming large factorials.
pub(crate) fn lg_norm(ell_abs: u32, p: u32, waist: f64) -> f64 {
    let mut ratio = 1.0;
    for k in 1..=ell_abs {
        ratio /= (p + k) as f64;
    }
    (2.0 * ratio / std::f64::consts::PI).sqrt() / waist
}

/// Generalized Laguerre polynomial L_p^a(x) by the three-term recurrence.
pub(crate) fn laguerre(p: u32, a: f64, x: f64) -> f64 {
    if p == 0 {
        return 1.0;
    }
    let mut lkm1 = 1.0;
    let mut lk = 1.0 + a - x;
    for k in 1..p {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * lk - (kf + a) * lkm1) / (kf + 1.0);
        lkm1 = lk;
        lk = next;
    }
    lk
}

/// Radial amplitude (everything except the e^{i l phi} factor) at squared
/// radius `r2`, for precomputed normalization `norm`.
#[inline]
pub(crate) fn lg_radial(ell_abs: u32, p: u32, norm: f64, r2: f64, waist: f64) -> f64 {
    let arg = 2.0 * r2 / (waist * waist);
    norm * arg.sqrt().powi(ell_abs as i32)
        * laguerre(p, ell_abs as f64, arg)
        * (-r2 / (waist * waist)).exp()
}

/// Samples the LG mode on the grid.
pub fn lg_mode_field(index: LGIndex, grid: &GridSpec) -> ModeField {
    let n = grid.n;
    let w = grid.waist_mm;
    let ell_abs = index.ell.unsigned_abs();
    let norm = lg_norm(ell_abs, index.p, w);

    let mut field = Array2::from_elem((n, n), Complex64::ZERO);
    let rows: Vec<f64> = (0..n).map(|i| grid.coord(i)).collect();
    field
        .as_slice_mut()
        .expect("standard layout")
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(i, row)| {
            let y = rows[i];
            for (j, out) in row.iter_mut().enumerate() {
                let x = rows[j];
                let r2 = x * x + y * y;
                let radial = lg_radial(ell_abs, index.p, norm, r2, w);
                let phase = index.ell as f64 * y.atan2(x);
                *out = Complex64::from_polar(radial, phase);
            }
        });

    let norm2: f64 = field.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.pixel_area();
    let norm_deficit = (norm2 - 1.0).abs();
    ModeField {
        index,
        field,
        norm_deficit,
        spills: norm_deficit > SPILL_DEFICIT,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn test_grid() -> GridSpec {
        GridSpec::new(128, 0.9, 0.21 * 0.9).unwrap()
    }

    #[test]
    fn fundamental_is_real_positive_centered() {
        let g = test_grid();
        let m = lg_mode_field(LGIndex::new(0, 0), &g);
        let center = m.field[(64, 64)];
        assert!(center.re > 0.0);
        assert_abs_diff_eq!(center.im, 0.0, epsilon = 1e-15);
        let max = m
            .field
            .iter()
            .map(|c| c.norm())
            .fold(f64::NEG_INFINITY, f64::max);
        // center 4 pixels straddle the true maximum on an even grid
        assert!(center.norm() >= 0.999 * max);
        assert!(!m.spills);
    }

    #[test]
    fn vortex_vanishes_at_center_and_winds() {
        let g = GridSpec::new(129, 0.9, 0.2).unwrap();
        let m = lg_mode_field(LGIndex::new(1, 0), &g);
        // odd n: the central sample sits exactly on the axis
        assert_eq!(m.field[(64, 64)], Complex64::ZERO);

        // phase winds by 2 pi around a centered square loop
        let ring = 20usize;
        let c = 64usize;
        let mut path = Vec::new();
        for j in c - ring..=c + ring {
            path.push((c - ring, j));
        }
        for i in c - ring..=c + ring {
            path.push((i, c + ring));
        }
        for j in (c - ring..=c + ring).rev() {
            path.push((c + ring, j));
        }
        for i in (c - ring..=c + ring).rev() {
            path.push((i, c - ring));
        }
        let mut total = 0.0;
        let mut prev = m.field[path[0]].arg();
        for &px in path.iter().skip(1) {
            let a = m.field[px].arg();
            let mut d = a - prev;
            while d > std::f64::consts::PI {
                d -= 2.0 * std::f64::consts::PI;
            }
            while d < -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
            }
            total += d;
            prev = a;
        }
        assert_abs_diff_eq!(total, 2.0 * std::f64::consts::PI, epsilon = 1e-9);
    }

    #[test]
    fn contained_modes_are_grid_normalized() {
        let g = test_grid();
        for ell in [-3i32, 0, 2] {
            for p in [0u32, 2] {
                let m = lg_mode_field(LGIndex::new(ell, p), &g);
                let r_eff = g.waist_mm * ((2 * p + ell.unsigned_abs() + 1) as f64).sqrt();
                if r_eff < 0.8 * g.half_extent_mm {
                    assert!(
                        m.norm_deficit < 1e-6,
                        "({ell},{p}): deficit {}",
                        m.norm_deficit
                    );
                }
            }
        }
    }

    #[test]
    fn oversized_mode_carries_spill_warning() {
        let g = GridSpec::new(64, 0.9, 0.6).unwrap();
        let m = lg_mode_field(LGIndex::new(8, 4), &g);
        assert!(m.spills);
    }

    #[test]
    fn laguerre_recurrence_matches_closed_forms() {
        // L_2^a(x) = x^2/2 - (a+2) x + (a+1)(a+2)/2
        for &(a, x) in &[(0.0, 0.7), (1.0, 2.3), (3.0, 0.4)] {
            let expected = 0.5 * x * x - (a + 2.0) * x + 0.5 * (a + 1.0) * (a + 2.0);
            assert_abs_diff_eq!(laguerre(2, a, x), expected, epsilon = 1e-12);
        }
    }
}
