//! Ghost-image formation: Schmidt projection of the object decomposition into
//! the idler arm, intensity synthesis, and polarization-channel scaling.

use ndarray::Array2;

use super::decomposition::{synthesize, ModeDecomposition};
use super::grid::GridSpec;
use super::schmidt::SchmidtSpectrum;
use crate::error::{Error, Result};
use crate::polarization::{channel_settings, joint_probability, HardyAngles, PolarizationState};

/// Projects the bucket-detected signal onto the idler arm.
///
/// The idler amplitude at (l_i, p_i) is lambda_{l,p} A_{l,p}: the Schmidt
/// anticorrelation pairs l_i = -l_s, and the inverse projection of the signal
/// photon contributes the second sign flip, so the index map collapses to the
/// identity and a flat spectrum returns the object amplitudes (and hence the
/// object's own orientation) up to a global constant.
pub fn idler_state(
    decomp: &ModeDecomposition,
    spectrum: &SchmidtSpectrum,
) -> Result<ModeDecomposition> {
    if spectrum.truncation() != decomp.truncation {
        return Err(Error::TruncationMismatch(format!(
            "decomposition {:?} vs spectrum {:?}",
            decomp.truncation,
            spectrum.truncation()
        )));
    }
    let weights: Vec<f64> = spectrum.iter().map(|(_, l)| l).collect();
    let t = decomp.truncation;
    Ok(decomp.weighted(move |idx| {
        let l = (idx.ell + t.ell_max as i32) as usize;
        weights[l * (t.p_max as usize + 1) + idx.p as usize]
    }))
}

/// |Sigma B_{l,p} LG_{l,p}|^2 on the grid, rescaled so the image integrates
/// (midpoint rule) to the idler-state norm Sigma |B|^2.
pub fn ghost_intensity(idler: &ModeDecomposition, grid: &GridSpec) -> Array2<f64> {
    let field = synthesize(idler, grid);
    let mut image = field.mapv(|c| c.norm_sqr());
    let raw_integral: f64 = image.sum() * grid.pixel_area();
    let target = idler.captured_energy();
    if raw_integral > 0.0 && target > 0.0 {
        let scale = target / raw_integral;
        image.mapv_inplace(|v| v * scale);
    }
    image
}

/// Ghost image of Hardy channel `m` (1..=4): the spatial image scaled by the
/// channel's polarization joint probability. The hyper-entangled state is a
/// product of its polarization and spatial parts, so the polarization
/// projection is a separable per-channel constant.
pub fn channel_image(
    channel: u8,
    state: &PolarizationState,
    angles: &HardyAngles,
    spatial_image: &Array2<f64>,
) -> Result<Array2<f64>> {
    let (sig, idl) = channel_settings(channel, angles)?;
    let p = joint_probability(state, sig, idl)?;
    Ok(spatial_image.mapv(|v| v * p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::decomposition::{decompose_object, Truncation};
    use crate::spatial::lg::{lg_mode_field, LGIndex};
    use crate::spatial::object::{make_double_slit, DoubleSlitSpec, ObjectField};
    use crate::polarization::solve_hardy_angles;
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn grid() -> GridSpec {
        GridSpec::new(96, 0.9, 0.2).unwrap()
    }

    #[test]
    fn flat_spectrum_is_identity_up_to_constant() {
        let g = grid();
        let ds = make_double_slit(&g, DoubleSlitSpec::default()).unwrap();
        let t = Truncation::new(4, 3);
        let d = decompose_object(&ds.object, t);
        let idler = idler_state(&d, &SchmidtSpectrum::flat(t)).unwrap();
        let c = (t.mode_count() as f64).sqrt().recip();
        for (idx, b) in idler.iter() {
            let a = d.amplitude(idx).unwrap();
            assert!((b - a * c).norm() < 1e-15, "{idx:?}");
        }
    }

    #[test]
    fn ell_zero_spectrum_projects_to_symmetric_content() {
        let g = grid();
        let ds = make_double_slit(&g, DoubleSlitSpec::default()).unwrap();
        let t = Truncation::new(4, 3);
        let d = decompose_object(&ds.object, t);
        let weights: Vec<f64> = t
            .indices()
            .map(|i| if i.ell == 0 { 1.0 } else { 0.0 })
            .collect();
        let spectrum = SchmidtSpectrum::from_weights(t, weights).unwrap();
        let idler = idler_state(&d, &spectrum).unwrap();
        for (idx, b) in idler.iter() {
            if idx.ell != 0 {
                assert_eq!(b, Complex64::ZERO);
            }
        }
    }

    #[test]
    fn single_mode_spectrum_keeps_one_amplitude() {
        let g = grid();
        let t = Truncation::new(2, 1);
        let mode = lg_mode_field(LGIndex::new(1, 0), &g);
        let object = ObjectField {
            grid: g,
            values: mode.field.clone(),
        };
        let d = decompose_object(&object, t);
        let spectrum = SchmidtSpectrum::single_mode(t, LGIndex::new(1, 0)).unwrap();
        let idler = idler_state(&d, &spectrum).unwrap();
        let kept = idler.amplitude(LGIndex::new(1, 0)).unwrap();
        assert!(kept.norm() > 0.99);
        for (idx, b) in idler.iter() {
            if idx != LGIndex::new(1, 0) {
                assert!(b.norm() < 1e-4, "{idx:?}: {}", b.norm());
            }
        }
    }

    #[test]
    fn truncation_mismatch_rejected() {
        let g = grid();
        let ds = make_double_slit(&g, DoubleSlitSpec::default()).unwrap();
        let d = decompose_object(&ds.object, Truncation::new(3, 2));
        let spectrum = SchmidtSpectrum::flat(Truncation::new(4, 2));
        assert!(matches!(
            idler_state(&d, &spectrum),
            Err(Error::TruncationMismatch(_))
        ));
    }

    #[test]
    fn pure_fundamental_gives_gaussian_intensity() {
        let g = grid();
        let t = Truncation::new(1, 1);
        let mode = lg_mode_field(LGIndex::new(0, 0), &g);
        let object = ObjectField {
            grid: g,
            values: mode.field.clone(),
        };
        let d = decompose_object(&object, t);
        let image = ghost_intensity(&d, &g);
        // radially monotone from the center, integrates to the state norm
        let c = g.n / 2;
        assert!(image[(c, c)] > image[(c, c + 10)]);
        assert!(image[(c, c + 10)] > image[(c, c + 30)]);
        let integral: f64 = image.sum() * g.pixel_area();
        assert_abs_diff_eq!(integral, d.captured_energy(), epsilon = 1e-12);
    }

    #[test]
    fn zero_idler_gives_zero_image() {
        let g = grid();
        let t = Truncation::new(2, 1);
        let object =
            ObjectField::new(g, Array2::from_elem((g.n, g.n), Complex64::ZERO)).unwrap();
        let d = decompose_object(&object, t);
        let image = ghost_intensity(&d, &g);
        assert!(image.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn channel_images_scale_separably() {
        let g = GridSpec::new(64, 0.9, 0.2).unwrap();
        let ds = make_double_slit(&g, DoubleSlitSpec::default()).unwrap();
        let t = Truncation::new(3, 2);
        let d = decompose_object(&ds.object, t);
        let idler = idler_state(&d, &SchmidtSpectrum::flat(t)).unwrap();
        let spatial = ghost_intensity(&idler, &g);

        let state = PolarizationState::from_hardy(0.43, 0.9, PI).unwrap();
        let angles = solve_hardy_angles(0.43, 0.9).unwrap();
        let ch4 = channel_image(4, &state, &angles, &spatial).unwrap();
        let ch1 = channel_image(1, &state, &angles, &spatial).unwrap();

        // channels at the Hardy zeros are identically zero
        assert!(ch1.iter().all(|&v| v < 1e-12 * spatial.iter().sum::<f64>()));
        // channel 4 is the spatial image times one constant
        let scale = crate::polarization::hardy_probability(
            0.43 / 0.9949f64.sqrt(),
            0.9 / 0.9949f64.sqrt(),
        )
        .unwrap();
        for (a, b) in ch4.iter().zip(spatial.iter()) {
            assert_abs_diff_eq!(*a, scale * *b, epsilon = 1e-10 * scale.max(1e-30));
        }
        // and that constant is the (approximately 0.088) Hardy probability
        let ratio = ch4.sum() / spatial.sum();
        assert_abs_diff_eq!(ratio, 0.089, epsilon = 2e-3);

        assert!(channel_image(0, &state, &angles, &spatial).is_err());
        assert!(channel_image(5, &state, &angles, &spatial).is_err());
    }

    #[test]
    fn maximally_entangled_channel4_is_dark() {
        let g = GridSpec::new(64, 0.9, 0.2).unwrap();
        let ds = make_double_slit(&g, DoubleSlitSpec::default()).unwrap();
        let t = Truncation::new(3, 2);
        let d = decompose_object(&ds.object, t);
        let idler = idler_state(&d, &SchmidtSpectrum::flat(t)).unwrap();
        let spatial = ghost_intensity(&idler, &g);

        let r = std::f64::consts::FRAC_1_SQRT_2;
        let state = PolarizationState::from_hardy(r, r, PI).unwrap();
        let angles = solve_hardy_angles(r, r).unwrap();
        let ch4 = channel_image(4, &state, &angles, &spatial).unwrap();
        assert!(ch4.iter().all(|&v| v < 1e-25));
    }
}
