//! Two-qubit polarization states and the Hardy nonlocality construction.
//!
//! The entangled source is the non-maximally entangled family
//! `alpha |HH> + beta e^{i phi} |VV>`; the calibrated experimental state uses
//! phi = pi. Measurement settings are linear-polarizer angles measured from H
//! toward V. For that family the three Hardy zero conditions
//!
//!   P(A0,B0) = P(A0bar,B1) = P(A1,B0bar) = 0
//!
//! admit the closed-form angles
//!
//!   theta0 = atan(sqrt(alpha/beta)),  theta1 = -atan((alpha/beta)^{3/2}),
//!
//! leaving P(A1,B1) = (alpha-beta)^2 (alpha beta)^2 / (1 - alpha beta)^2
//! strictly positive, which is the whole paradox.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Allowed deviation of a state norm from 1 in [`joint_probability`].
pub const NORM_TOL: f64 = 1e-6;
/// Allowed deviation of alpha^2 + beta^2 from 1; admits literature values
/// rounded to two decimals (0.43^2 + 0.9^2 = 0.9949).
pub const UNIT_PAIR_TOL: f64 = 1e-2;
/// Amplitudes below this are treated as a product state: no Hardy angles.
pub const DEGENERATE_TOL: f64 = 1e-6;

/// Two-qubit polarization state over the basis {HH, HV, VH, VV}.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationState {
    pub amp_hh: Complex64,
    pub amp_hv: Complex64,
    pub amp_vh: Complex64,
    pub amp_vv: Complex64,
}

impl PolarizationState {
    /// Builds a state from raw amplitudes, rescaling to unit norm.
    pub fn new(
        amp_hh: Complex64,
        amp_hv: Complex64,
        amp_vh: Complex64,
        amp_vv: Complex64,
    ) -> Result<Self> {
        let norm = (amp_hh.norm_sqr() + amp_hv.norm_sqr() + amp_vh.norm_sqr() + amp_vv.norm_sqr())
            .sqrt();
        if norm < DEGENERATE_TOL {
            return Err(Error::NotNormalized {
                norm,
                tol: DEGENERATE_TOL,
            });
        }
        Ok(Self {
            amp_hh: amp_hh / norm,
            amp_hv: amp_hv / norm,
            amp_vh: amp_vh / norm,
            amp_vv: amp_vv / norm,
        })
    }

    /// The Hardy family `alpha |HH> + beta e^{i phi} |VV>`, normalized.
    ///
    /// `alpha` and `beta` must be positive with alpha^2 + beta^2 close to 1
    /// (within [`UNIT_PAIR_TOL`], so rounded published values are accepted).
    pub fn from_hardy(alpha: f64, beta: f64, phi: f64) -> Result<Self> {
        check_amplitude_pair(alpha, beta)?;
        Self::new(
            Complex64::new(alpha, 0.0),
            Complex64::ZERO,
            Complex64::ZERO,
            Complex64::from_polar(beta, phi),
        )
    }

    pub fn norm(&self) -> f64 {
        (self.amp_hh.norm_sqr()
            + self.amp_hv.norm_sqr()
            + self.amp_vh.norm_sqr()
            + self.amp_vv.norm_sqr())
        .sqrt()
    }
}

/// A single-qubit polarizer setting: angle from H toward V, radians.
///
/// `barred = false` selects `cos(theta)|H> + sin(theta)|V>`; `barred = true`
/// selects the orthogonal `-sin(theta)|H> + cos(theta)|V>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSetting {
    pub theta: f64,
    pub barred: bool,
}

impl MeasurementSetting {
    pub fn unbarred(theta: f64) -> Self {
        Self {
            theta,
            barred: false,
        }
    }

    pub fn barred(theta: f64) -> Self {
        Self {
            theta,
            barred: true,
        }
    }

    /// (H, V) amplitudes of the projected single-qubit state.
    pub fn amplitudes(&self) -> [f64; 2] {
        let (s, c) = self.theta.sin_cos();
        if self.barred {
            [-s, c]
        } else {
            [c, s]
        }
    }

    /// The orthogonal outcome at the same analyzer angle.
    pub fn complement(&self) -> Self {
        Self {
            theta: self.theta,
            barred: !self.barred,
        }
    }

    /// Equivalent unbarred angle: the barred setting is theta + 90 degrees.
    pub fn effective_angle(&self) -> f64 {
        if self.barred {
            self.theta + FRAC_PI_2
        } else {
            self.theta
        }
    }
}

/// The two analyzer angles of a Hardy measurement set, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyAngles {
    pub theta0: f64,
    pub theta1: f64,
}

impl HardyAngles {
    /// Barred companion of theta0 (exactly theta0 + 90 degrees).
    pub fn theta0_barred(&self) -> f64 {
        self.theta0 + FRAC_PI_2
    }

    /// Barred companion of theta1.
    pub fn theta1_barred(&self) -> f64 {
        self.theta1 + FRAC_PI_2
    }
}

/// Joint probability of the two-photon outcome (signal, idler) on `state`.
///
/// Rejects states whose norm is off by more than [`NORM_TOL`]; the four
/// outcome probabilities at fixed analyzer angles then sum to 1.
pub fn joint_probability(
    state: &PolarizationState,
    signal: MeasurementSetting,
    idler: MeasurementSetting,
) -> Result<f64> {
    let norm = state.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized {
            norm,
            tol: NORM_TOL,
        });
    }
    let [sh, sv] = signal.amplitudes();
    let [ih, iv] = idler.amplitudes();
    let amp = state.amp_hh * (sh * ih)
        + state.amp_hv * (sh * iv)
        + state.amp_vh * (sv * ih)
        + state.amp_vv * (sv * iv);
    Ok(amp.norm_sqr())
}

/// Signal/idler settings of Hardy imaging channel `m` in 1..=4.
///
/// 1 -> (A0, B0), 2 -> (A0bar, B1), 3 -> (A1, B0bar), 4 -> (A1, B1).
pub fn channel_settings(
    channel: u8,
    angles: &HardyAngles,
) -> Result<(MeasurementSetting, MeasurementSetting)> {
    let a0 = MeasurementSetting::unbarred(angles.theta0);
    let a1 = MeasurementSetting::unbarred(angles.theta1);
    match channel {
        1 => Ok((a0, a0)),
        2 => Ok((a0.complement(), a1)),
        3 => Ok((a1, a0.complement())),
        4 => Ok((a1, a1)),
        other => Err(Error::InvalidChannel(other)),
    }
}

fn check_amplitude_pair(alpha: f64, beta: f64) -> Result<()> {
    if !alpha.is_finite()
        || !beta.is_finite()
        || alpha < DEGENERATE_TOL
        || beta < DEGENERATE_TOL
        || alpha > 1.0 - DEGENERATE_TOL
        || beta > 1.0 - DEGENERATE_TOL
    {
        return Err(Error::DegenerateState { alpha, beta });
    }
    let sum = alpha * alpha + beta * beta;
    if (sum - 1.0).abs() > UNIT_PAIR_TOL {
        return Err(Error::NotUnitPair {
            sum,
            tol: UNIT_PAIR_TOL,
        });
    }
    Ok(())
}

/// Solves the three Hardy zero conditions for the state
/// `alpha |HH> - beta |VV>` (the phi = pi family).
///
/// theta0 = atan(sqrt(alpha/beta)), theta1 = -atan((alpha/beta)^{3/2});
/// barred settings are theta + 90 degrees exactly.
pub fn solve_hardy_angles(alpha: f64, beta: f64) -> Result<HardyAngles> {
    check_amplitude_pair(alpha, beta)?;
    let ratio = alpha / beta;
    Ok(HardyAngles {
        theta0: ratio.sqrt().atan(),
        theta1: -ratio.powf(1.5).atan(),
    })
}

/// Closed-form Hardy probability
/// P(A1,B1) = (alpha - beta)^2 (alpha beta)^2 / (1 - alpha beta)^2,
/// evaluated verbatim on the given amplitudes.
///
/// For an exactly normalized pair this equals [`joint_probability`] at the
/// solved (theta1, theta1) settings; for rounded published values (0.43, 0.9)
/// it reproduces the published 0.088.
pub fn hardy_probability(alpha: f64, beta: f64) -> Result<f64> {
    check_amplitude_pair(alpha, beta)?;
    let ab = alpha * beta;
    let d = alpha - beta;
    Ok(d * d * ab * ab / ((1.0 - ab) * (1.0 - ab)))
}

/// Result of maximizing the Hardy probability over the normalized family.
#[derive(Debug, Clone, Copy)]
pub struct HardyOptimum {
    pub alpha: f64,
    pub beta: f64,
    pub angles: HardyAngles,
    pub probability: f64,
}

/// Maximizes [`hardy_probability`] over alpha in (0, 1) with
/// beta = sqrt(1 - alpha^2).
///
/// The objective is symmetric under alpha <-> beta and vanishes at
/// alpha = beta, so it is unimodal on each side; the search runs golden
/// section on the alpha < beta branch and reports that maximizer
/// (alpha ~ 0.4211, P = tau^5 ~ 0.09017 with tau the golden-ratio conjugate).
pub fn optimize_hardy() -> HardyOptimum {
    let objective = |a: f64| {
        let b = (1.0 - a * a).sqrt();
        let ab = a * b;
        let d = a - b;
        d * d * ab * ab / ((1.0 - ab) * (1.0 - ab))
    };
    let alpha = golden_section_max(objective, 1e-4, std::f64::consts::FRAC_1_SQRT_2 - 1e-4, 1e-12);
    let beta = (1.0 - alpha * alpha).sqrt();
    HardyOptimum {
        alpha,
        beta,
        angles: solve_hardy_angles(alpha, beta).expect("interior alpha is non-degenerate"),
        probability: objective(alpha),
    }
}

/// Golden-section search for the maximum of a unimodal `f` on [lo, hi].
fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, xtol: f64) -> f64 {
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > xtol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn calibrated() -> PolarizationState {
        PolarizationState::from_hardy(0.43, 0.9, PI).unwrap()
    }

    #[test]
    fn construction_normalizes() {
        let s = calibrated();
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-12);
        assert_eq!(s.amp_hv, Complex64::ZERO);
        assert_eq!(s.amp_vh, Complex64::ZERO);
    }

    #[test]
    fn rejects_far_from_unit_pair() {
        assert!(matches!(
            PolarizationState::from_hardy(0.2, 0.3, PI),
            Err(Error::NotUnitPair { .. })
        ));
    }

    #[test]
    fn rejects_degenerate_amplitudes() {
        assert!(matches!(
            solve_hardy_angles(1e-9, 1.0 - 1e-9),
            Err(Error::DegenerateState { .. })
        ));
        assert!(hardy_probability(0.0, 1.0).is_err());
    }

    #[test]
    fn settings_orthonormal() {
        let a = MeasurementSetting::unbarred(0.7);
        let b = a.complement();
        let [ah, av] = a.amplitudes();
        let [bh, bv] = b.amplitudes();
        assert_abs_diff_eq!(ah * bh + av * bv, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ah * ah + av * av, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(bh * bh + bv * bv, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn hh_state_measured_in_h() {
        // |HH> measured with both analyzers at 0 degrees
        let s = PolarizationState::new(
            Complex64::ONE,
            Complex64::ZERO,
            Complex64::ZERO,
            Complex64::ZERO,
        )
        .unwrap();
        let h = MeasurementSetting::unbarred(0.0);
        assert_abs_diff_eq!(joint_probability(&s, h, h).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_condition_at_paper_angle() {
        // theta0 = 34.7 degrees quoted in the paper; the exact zero sits at
        // the analytic theta0, so the probability there is below 1e-3.
        let s = calibrated();
        let t = MeasurementSetting::unbarred(34.7_f64.to_radians());
        let p = joint_probability(&s, t, t).unwrap();
        assert!(p < 1e-3, "p = {p}");
    }

    #[test]
    fn equal_superposition_at_45_degrees() {
        // (|HH> + |VV>)/sqrt2 projected on 45/45: |(1/2 + 1/2)/sqrt2|^2 = 1/2
        let s = PolarizationState::from_hardy(std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2, 0.0)
            .unwrap();
        let t = MeasurementSetting::unbarred(45.0_f64.to_radians());
        assert_abs_diff_eq!(joint_probability(&s, t, t).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn unnormalized_state_rejected() {
        let s = PolarizationState {
            amp_hh: Complex64::new(0.43, 0.0),
            amp_hv: Complex64::ZERO,
            amp_vh: Complex64::ZERO,
            amp_vv: Complex64::new(-0.9, 0.0),
        };
        let t = MeasurementSetting::unbarred(0.0);
        assert!(matches!(
            joint_probability(&s, t, t),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn solved_angles_match_paper() {
        let angles = solve_hardy_angles(0.43, 0.9).unwrap();
        assert_abs_diff_eq!(angles.theta0.to_degrees(), 34.7, epsilon = 0.1);
        assert_abs_diff_eq!(angles.theta1.to_degrees(), -18.3, epsilon = 0.1);
        assert_abs_diff_eq!(angles.theta0_barred().to_degrees(), 124.7, epsilon = 0.1);
        assert_abs_diff_eq!(angles.theta1_barred().to_degrees(), 71.7, epsilon = 0.1);
    }

    #[test]
    fn zero_conditions_below_1e12() {
        let s = calibrated();
        let angles = solve_hardy_angles(0.43, 0.9).unwrap();
        for channel in 1..=3u8 {
            let (sig, idl) = channel_settings(channel, &angles).unwrap();
            let p = joint_probability(&s, sig, idl).unwrap();
            assert!(p < 1e-12, "channel {channel}: p = {p}");
        }
    }

    #[test]
    fn equal_amplitudes_have_45_degree_angles_and_zero_probability() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let angles = solve_hardy_angles(r, r).unwrap();
        assert_abs_diff_eq!(angles.theta0.to_degrees(), 45.0, epsilon = 1e-10);
        assert_abs_diff_eq!(angles.theta1.to_degrees(), -45.0, epsilon = 1e-10);
        // the paradox vanishes for the maximally entangled state
        assert!(hardy_probability(r, r).unwrap() < 1e-30);
        let s = PolarizationState::from_hardy(r, r, PI).unwrap();
        let (sig, idl) = channel_settings(4, &angles).unwrap();
        assert!(joint_probability(&s, sig, idl).unwrap() < 1e-30);
    }

    #[test]
    fn paper_probability_value() {
        let p = hardy_probability(0.43, 0.9).unwrap();
        assert_abs_diff_eq!(p, 0.088, epsilon = 5e-4);
    }

    #[test]
    fn near_product_state_probability_is_tiny() {
        let alpha: f64 = 0.01;
        let beta = (1.0 - alpha * alpha).sqrt();
        assert!(hardy_probability(alpha, beta).unwrap() < 1e-3);
    }

    #[test]
    fn optimize_matches_golden_ratio_value() {
        let opt = optimize_hardy();
        // tau^5 with tau = (sqrt5 - 1)/2
        let tau = 0.5 * (5.0_f64.sqrt() - 1.0);
        assert_abs_diff_eq!(opt.probability, tau.powi(5), epsilon = 1e-10);
        assert_abs_diff_eq!(opt.alpha, 0.42113, epsilon = 1e-4);
        assert!(opt.probability >= 0.090);
    }

    #[test]
    fn channel_settings_reject_bad_index() {
        let angles = solve_hardy_angles(0.43, 0.9).unwrap();
        assert!(matches!(
            channel_settings(0, &angles),
            Err(Error::InvalidChannel(0))
        ));
        assert!(channel_settings(5, &angles).is_err());
    }

    proptest! {
        // Completeness: the four outcomes at fixed analyzer angles sum to 1.
        #[test]
        fn outcome_probabilities_sum_to_one(
            a in 0.05f64..0.95,
            phi in 0.0f64..(2.0 * PI),
            ts in -1.5f64..1.5,
            ti in -1.5f64..1.5,
        ) {
            let b = (1.0 - a * a).sqrt();
            let s = PolarizationState::from_hardy(a, b, phi).unwrap();
            let mut sum = 0.0;
            for sb in [false, true] {
                for ib in [false, true] {
                    sum += joint_probability(
                        &s,
                        MeasurementSetting { theta: ts, barred: sb },
                        MeasurementSetting { theta: ti, barred: ib },
                    ).unwrap();
                }
            }
            prop_assert!((sum - 1.0).abs() < 1e-12);
        }

        // Zero-condition residuals and closed-form consistency on the
        // normalized family.
        #[test]
        fn solved_angles_zero_conditions(a in 0.05f64..0.9) {
            let b = (1.0 - a * a).sqrt();
            let s = PolarizationState::from_hardy(a, b, PI).unwrap();
            let angles = solve_hardy_angles(a, b).unwrap();
            for channel in 1..=3u8 {
                let (sig, idl) = channel_settings(channel, &angles).unwrap();
                prop_assert!(joint_probability(&s, sig, idl).unwrap() < 1e-12);
            }
            let (sig, idl) = channel_settings(4, &angles).unwrap();
            let via_projection = joint_probability(&s, sig, idl).unwrap();
            let via_formula = hardy_probability(a, b).unwrap();
            prop_assert!((via_projection - via_formula).abs() < 1e-10);
        }

        // Swapping alpha <-> beta leaves the probability invariant and maps
        // the angles to their complements.
        #[test]
        fn swap_symmetry(a in 0.05f64..0.7) {
            let b = (1.0 - a * a).sqrt();
            let p1 = hardy_probability(a, b).unwrap();
            let p2 = hardy_probability(b, a).unwrap();
            prop_assert!((p1 - p2).abs() < 1e-14);
            let ang = solve_hardy_angles(a, b).unwrap();
            let swapped = solve_hardy_angles(b, a).unwrap();
            // tan(theta0) tan(theta0') = 1  =>  theta0 + theta0' = 90 deg
            prop_assert!((ang.theta0 + swapped.theta0 - FRAC_PI_2).abs() < 1e-12);
            prop_assert!((ang.theta1 + swapped.theta1 + FRAC_PI_2).abs() < 1e-12);
        }
    }

    #[test]
    fn consistency_sweep_100_points() {
        // hardy_probability == joint_probability at the solved angles across
        // a uniform sweep of the normalized family.
        for k in 1..=100 {
            let a = 0.03 + 0.64 * (k as f64) / 100.0;
            let b = (1.0 - a * a).sqrt();
            let s = PolarizationState::from_hardy(a, b, PI).unwrap();
            let angles = solve_hardy_angles(a, b).unwrap();
            let (sig, idl) = channel_settings(4, &angles).unwrap();
            let via_projection = joint_probability(&s, sig, idl).unwrap();
            let via_formula = hardy_probability(a, b).unwrap();
            assert!(
                (via_projection - via_formula).abs() < 1e-10,
                "alpha={a}: {via_projection} vs {via_formula}"
            );
        }
    }
}
