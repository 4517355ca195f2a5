//! Mode-expansion of transmission objects: A_{l,p} = <l,p|psi> by midpoint
//! quadrature over the grid.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use super::grid::GridSpec;
use super::lg::{lg_norm, lg_radial, LGIndex};
use super::object::ObjectField;

/// Rectangular truncation of the LG basis: |l| <= ell_max, p <= p_max.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    pub ell_max: u32,
    pub p_max: u32,
}

impl Truncation {
    pub fn new(ell_max: u32, p_max: u32) -> Self {
        Self { ell_max, p_max }
    }

    /// Number of retained modes: (2 ell_max + 1)(p_max + 1).
    pub fn mode_count(&self) -> usize {
        (2 * self.ell_max as usize + 1) * (self.p_max as usize + 1)
    }

    /// Basis indices in a fixed deterministic order (l ascending, p inner).
    pub fn indices(&self) -> impl Iterator<Item = LGIndex> + '_ {
        let ell_max = self.ell_max as i32;
        let p_max = self.p_max;
        (-ell_max..=ell_max)
            .flat_map(move |ell| (0..=p_max).map(move |p| LGIndex::new(ell, p)))
    }

    pub fn contains(&self, index: LGIndex) -> bool {
        index.ell.unsigned_abs() <= self.ell_max && index.p <= self.p_max
    }

    fn offset(&self, index: LGIndex) -> Option<usize> {
        if !self.contains(index) {
            return None;
        }
        let l = (index.ell + self.ell_max as i32) as usize;
        Some(l * (self.p_max as usize + 1) + index.p as usize)
    }
}

/// Overlap amplitudes of a field with the truncated LG basis.
#[derive(Debug, Clone)]
pub struct ModeDecomposition {
    pub truncation: Truncation,
    amplitudes: Vec<Complex64>,
    /// Quadrature energy of the decomposed field (reference for the Parseval
    /// deficit); for synthesized mode-space states this equals the captured
    /// energy.
    pub total_energy: f64,
    /// Set when the source field was identically zero.
    pub zero_energy: bool,
}

impl ModeDecomposition {
    pub fn from_amplitudes(
        truncation: Truncation,
        amplitudes: Vec<Complex64>,
        total_energy: f64,
    ) -> Self {
        assert_eq!(amplitudes.len(), truncation.mode_count());
        let zero_energy = total_energy == 0.0;
        Self {
            truncation,
            amplitudes,
            total_energy,
            zero_energy,
        }
    }

    pub fn amplitude(&self, index: LGIndex) -> Option<Complex64> {
        self.truncation.offset(index).map(|o| self.amplitudes[o])
    }

    /// Captured energy Sigma |A|^2.
    pub fn captured_energy(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Fraction of the source energy captured by the truncation (1 when the
    /// source was empty).
    pub fn captured_fraction(&self) -> f64 {
        if self.total_energy > 0.0 {
            self.captured_energy() / self.total_energy
        } else {
            1.0
        }
    }

    /// Energy missed by the truncation.
    pub fn parseval_deficit(&self) -> f64 {
        self.total_energy - self.captured_energy()
    }

    /// (index, amplitude) pairs in deterministic basis order.
    pub fn iter(&self) -> impl Iterator<Item = (LGIndex, Complex64)> + '_ {
        self.truncation
            .indices()
            .zip(self.amplitudes.iter().copied())
    }

    /// Applies a per-mode real weight, returning a new decomposition.
    pub(crate) fn weighted(&self, weight: impl Fn(LGIndex) -> f64) -> Self {
        let amplitudes: Vec<Complex64> = self
            .truncation
            .indices()
            .zip(self.amplitudes.iter())
            .map(|(idx, a)| a * weight(idx))
            .collect();
        let total: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        Self {
            truncation: self.truncation,
            amplitudes,
            total_energy: total,
            zero_energy: total == 0.0,
        }
    }
}

/// Projects `object` onto the truncated LG basis of its own grid.
///
/// Each amplitude is the quadrature sum conj(LG) * psi * pixel_area, summed
/// in row-major order; modes are evaluated independently (and in parallel)
/// so the result does not depend on scheduling.
pub fn decompose_object(object: &ObjectField, truncation: Truncation) -> ModeDecomposition {
    let grid = &object.grid;
    let total_energy = object.energy();
    let indices: Vec<LGIndex> = truncation.indices().collect();
    let amplitudes: Vec<Complex64> = indices
        .par_iter()
        .map(|&idx| overlap(object, grid, idx))
        .collect();
    ModeDecomposition::from_amplitudes(truncation, amplitudes, total_energy)
}

fn overlap(object: &ObjectField, grid: &GridSpec, index: LGIndex) -> Complex64 {
    let n = grid.n;
    let w = grid.waist_mm;
    let ell_abs = index.ell.unsigned_abs();
    let norm = lg_norm(ell_abs, index.p, w);
    let mut acc = Complex64::ZERO;
    for i in 0..n {
        let y = grid.coord(i);
        for j in 0..n {
            let v = object.values[(i, j)];
            if v == Complex64::ZERO {
                continue;
            }
            let x = grid.coord(j);
            let r2 = x * x + y * y;
            let radial = lg_radial(ell_abs, index.p, norm, r2, w);
            // conj(LG) = radial * e^{-i l phi}
            let mode = Complex64::from_polar(radial, -(index.ell as f64) * y.atan2(x));
            acc += mode * v;
        }
    }
    acc * grid.pixel_area()
}

/// Synthesizes the field Sigma A_{l,p} LG_{l,p} on `grid`.
///
/// Pixels are independent (parallel); per pixel the modes are accumulated in
/// the fixed basis order, so the sum is bit-reproducible.
pub fn synthesize(decomp: &ModeDecomposition, grid: &GridSpec) -> Array2<Complex64> {
    let n = grid.n;
    let w = grid.waist_mm;
    let t = decomp.truncation;
    // precompute per-(l,p) normalizations once
    let norms: Vec<f64> = t
        .indices()
        .map(|idx| lg_norm(idx.ell.unsigned_abs(), idx.p, w))
        .collect();
    let amps: Vec<(LGIndex, Complex64)> = decomp.iter().collect();

    let mut field = Array2::from_elem((n, n), Complex64::ZERO);
    let coords: Vec<f64> = (0..n).map(|i| grid.coord(i)).collect();
    field
        .as_slice_mut()
        .expect("standard layout")
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(i, row)| {
            let y = coords[i];
            for (j, out) in row.iter_mut().enumerate() {
                let x = coords[j];
                let r2 = x * x + y * y;
                let phi = y.atan2(x);
                let mut acc = Complex64::ZERO;
                for (k, &(idx, a)) in amps.iter().enumerate() {
                    if a == Complex64::ZERO {
                        continue;
                    }
                    let radial = lg_radial(idx.ell.unsigned_abs(), idx.p, norms[k], r2, w);
                    acc += a * Complex64::from_polar(radial, idx.ell as f64 * phi);
                }
                *out = acc;
            }
        });
    field
}
