//! Symmetric arbitrary-strength two-outcome measurements.
//!
//! A two-branch interferometer with arm unitaries `U1`, `U2` realizes the
//! measurement pair
//!
//! ```text
//! M1 = sqrt((1+e)/2) |m+><m+| + sqrt((1-e)/2) |m-><m-|
//! M2 = sqrt((1-e)/2) |m+><m+| + sqrt((1+e)/2) |m-><m-|
//! ```
//!
//! where the strength `e` and the direction basis `(m+, m-)` are determined
//! by the splitter reflectivity `r` and the arm overlap `w = <H|U1^H U2|V>`.
//! Everything here is computed twice — once through these closed forms and
//! once through the polar decomposition of the raw branch operators — and the
//! two paths must agree.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mat2::Complex2x2;
use crate::optics::SastomConfig;
use crate::qubit::{basis_from_half_phase, fold_angle, measurement_basis};

/// Overlaps with modulus at or below this are treated as exactly zero when
/// classifying the degenerate direction cases.
const W_FLOOR: f64 = 1e-15;

/// Strengths at or below this are reported with the conventional direction
/// `(theta, phi) = (pi/2, 0)` because the measurement is proportional to the
/// identity and has no direction.
const EPSILON_FLOOR: f64 = 1e-14;

/// Scalar invariants of a two-outcome measurement: strength, arm overlap,
/// direction angles, and the orthonormal direction basis.
#[derive(Clone, Copy, Debug)]
pub struct SastomCharacterization {
    /// Measurement strength in `[0, 1]`: `0` is no measurement, `1` is
    /// projective.
    pub epsilon: f64,
    /// Arm overlap `<H|U1^H U2|V>`.
    pub w: Complex64,
    /// Polar angle of the dominant outcome direction, in `[0, pi]`.
    pub theta: f64,
    /// Canonical phase report: twice the half-phase of `w`, folded into
    /// `(-pi, pi]`. The direction basis itself (`m_plus`, `m_minus`) is built
    /// from the half-phase of `w` directly, which carries one more sign bit
    /// than the folded scalar.
    pub phi: f64,
    /// Unit eigenvector carrying the `sqrt((1+e)/2)` weight of `M1`.
    pub m_plus: [Complex64; 2],
    /// Unit eigenvector carrying the `sqrt((1-e)/2)` weight of `M1`.
    pub m_minus: [Complex64; 2],
}

/// A complete two-outcome measurement: positive operators `m1`, `m2`, the
/// compensation unitaries `v1`, `v2` that restore the raw branch operators
/// (`X_n = V_n^H M_n`), and the scalar characterization.
#[derive(Clone, Copy, Debug)]
pub struct MeasurementPair {
    pub m1: Complex2x2,
    pub m2: Complex2x2,
    pub v1: Complex2x2,
    pub v2: Complex2x2,
    pub characterization: SastomCharacterization,
}

/// Strength and direction angles from an interferometer configuration,
/// without building the operators.
///
/// The strength is evaluated as `sqrt(u^2 + |w|^2 (1 - u^2))` with
/// `u = r^2 - t^2`, which is algebraically `sqrt(1 - 4 r^2 t^2 (1 - |w|^2))`
/// but keeps full precision near the balanced point `r = t`.
pub fn characterize_sastom(cfg: &SastomConfig, tol: f64) -> Result<SastomCharacterization> {
    let (u1, u2) = cfg.arm_unitaries(tol)?;
    let w = (u1.adjoint() * u2).at(0, 1);
    let r = cfg.reflectivity();
    let u = (r - cfg.transmissivity()) * (r + cfg.transmissivity());
    Ok(characterize_from_overlap(u, w))
}

/// Characterization from the balance parameter `u = r^2 - t^2` and the arm
/// overlap `w`.
fn characterize_from_overlap(u: f64, w: Complex64) -> SastomCharacterization {
    let w_mod = w.norm();
    let epsilon = f64::hypot(u, w_mod * (1.0 - u * u).max(0.0).sqrt()).min(1.0);

    let (theta, alpha, w) = if epsilon <= EPSILON_FLOOR {
        // M1 and M2 are both proportional to the identity; report the
        // conventional equatorial direction.
        (std::f64::consts::FRAC_PI_2, 0.0, Complex64::new(0.0, 0.0))
    } else if w_mod <= W_FLOOR {
        // Diagonal branch operators: the direction degenerates to a pole.
        if u >= 0.0 {
            (0.0, 0.0, Complex64::new(0.0, 0.0))
        } else {
            (std::f64::consts::PI, 0.0, Complex64::new(0.0, 0.0))
        }
    } else {
        let theta = (u / epsilon).clamp(-1.0, 1.0).acos();
        (theta, w.arg(), w)
    };

    // The basis is built from the half-phase of w itself; the scalar phi
    // reported alongside is its canonical fold into (-pi, pi].
    let (m_plus, m_minus) = basis_from_half_phase(theta, alpha);
    SastomCharacterization {
        epsilon,
        w,
        theta,
        phi: fold_angle(2.0 * alpha),
        m_plus,
        m_minus,
    }
}

/// The closed-form operator pair for a characterization: convex-root
/// combinations of the two direction projectors.
pub fn analytic_pair(ch: &SastomCharacterization) -> (Complex2x2, Complex2x2) {
    let c_plus = (0.5 * (1.0 + ch.epsilon)).sqrt();
    let c_minus = (0.5 * (1.0 - ch.epsilon)).max(0.0).sqrt();
    let p_plus = Complex2x2::outer(ch.m_plus, ch.m_plus);
    let p_minus = Complex2x2::outer(ch.m_minus, ch.m_minus);
    (
        p_plus.scale(c_plus) + p_minus.scale(c_minus),
        p_plus.scale(c_minus) + p_minus.scale(c_plus),
    )
}

/// Build the measurement pair from an interferometer configuration.
///
/// The operators are produced by polar-decomposing the raw branch operators;
/// in debug builds the result is cross-checked against the closed forms.
pub fn build_sastom(cfg: &SastomConfig, tol: f64) -> Result<MeasurementPair> {
    let characterization = characterize_sastom(cfg, tol)?;
    let (x1, x2) = cfg.interferometer_branches(tol)?;
    let p1 = x1.right_polar_decompose();
    let p2 = x2.right_polar_decompose();
    let pair = MeasurementPair {
        m1: p1.positive,
        m2: p2.positive,
        v1: p1.unitary,
        v2: p2.unitary,
        characterization,
    };
    debug_assert!(
        {
            let (a1, a2) = analytic_pair(&characterization);
            pair.m1.max_abs_diff(&a1).max(pair.m2.max_abs_diff(&a2)) <= 1e-10
        },
        "decomposition path disagrees with closed forms"
    );
    Ok(pair)
}

/// Largest entrywise deviation between the decomposition-path operators and
/// the closed-form operators for a configuration.
pub fn dual_path_deviation(cfg: &SastomConfig, tol: f64) -> Result<f64> {
    let pair = build_sastom(cfg, tol)?;
    let (a1, a2) = analytic_pair(&pair.characterization);
    Ok(pair.m1.max_abs_diff(&a1).max(pair.m2.max_abs_diff(&a2)))
}

/// Build a measurement pair directly from strength and direction, with
/// identity compensation unitaries.
pub fn sastom_from_strength(epsilon: f64, theta: f64, phi: f64) -> Result<MeasurementPair> {
    validate_strength_direction(epsilon, theta, phi)?;
    let (m_plus, m_minus) = measurement_basis(theta, phi);
    let characterization = SastomCharacterization {
        epsilon,
        w: overlap_for(epsilon, theta, phi),
        theta,
        phi,
        m_plus,
        m_minus,
    };
    let (m1, m2) = analytic_pair(&characterization);
    Ok(MeasurementPair {
        m1,
        m2,
        v1: Complex2x2::identity(),
        v2: Complex2x2::identity(),
        characterization,
    })
}

pub(crate) fn validate_strength_direction(epsilon: f64, theta: f64, phi: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::OutOfRange {
            name: "epsilon",
            value: epsilon,
            range: "[0, 1]",
        });
    }
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::OutOfRange {
            name: "theta",
            value: theta,
            range: "[0, pi]",
        });
    }
    if !(phi.is_finite() && -std::f64::consts::PI < phi && phi <= std::f64::consts::PI) {
        return Err(Error::OutOfRange {
            name: "phi",
            value: phi,
            range: "(-pi, pi]",
        });
    }
    Ok(())
}

/// Modulus of the canonical arm overlap realizing `(epsilon, theta)`:
/// `e sin(theta) / sqrt(1 - e^2 cos^2(theta))`; zero at the poles and in the
/// balanced limit, where no direction is defined.
pub(crate) fn overlap_modulus(epsilon: f64, theta: f64) -> f64 {
    let s = theta.sin();
    if epsilon <= EPSILON_FLOOR || s.abs() <= W_FLOOR {
        return 0.0;
    }
    let c = theta.cos();
    (epsilon * s / (1.0 - (epsilon * c) * (epsilon * c)).sqrt()).min(1.0)
}

/// The canonical arm overlap that realizes `(epsilon, theta, phi)` in the
/// gauge `U1 = I`: modulus from [`overlap_modulus`], phase `phi/2`.
pub(crate) fn overlap_for(epsilon: f64, theta: f64, phi: f64) -> Complex64 {
    Complex64::from_polar(overlap_modulus(epsilon, theta), 0.5 * phi)
}

/// `Tr(E1^H E2)` for the effect operators `E_n = M_n^H M_n`; equals
/// `(1 - epsilon^2)/2` for every configuration.
pub fn indistinguishability(pair: &MeasurementPair) -> f64 {
    let e1 = pair.m1.adjoint() * pair.m1;
    let e2 = pair.m2.adjoint() * pair.m2;
    crate::mat2::hs_inner(&e1, &e2).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat2::{hs_inner, vec_inner};
    use crate::optics::{counter_rotated_config, PlateStack, UnitarySpec};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plates(q1: f64, h: f64, q2: f64) -> UnitarySpec {
        UnitarySpec::Plates(PlateStack::new(q1, h, q2).unwrap())
    }

    fn identity_arm() -> UnitarySpec {
        UnitarySpec::identity()
    }

    #[test]
    fn diagonal_branches_give_absolute_balance_strength() {
        // r = 0.6, identity arms: w = 0, strength |t^2 - r^2| = 0.28, and the
        // dominant direction is the vertical pole because t^2 > r^2.
        let cfg = SastomConfig::new(0.6, identity_arm(), identity_arm()).unwrap();
        let ch = characterize_sastom(&cfg, 1e-10).unwrap();
        assert!((ch.epsilon - 0.28).abs() < 1e-15);
        assert_eq!(ch.w, c(0.0, 0.0));
        assert!((ch.theta - PI).abs() < 1e-15);
        assert_eq!(ch.phi, 0.0);
        assert!((ch.m_plus[0].norm()) < 1e-15);
        assert!((ch.m_plus[1] - c(1.0, 0.0)).norm() < 1e-15);
        // Mirror case: r^2 > t^2 pins the horizontal pole.
        let cfg = SastomConfig::new(0.8, identity_arm(), identity_arm()).unwrap();
        let ch = characterize_sastom(&cfg, 1e-10).unwrap();
        assert!((ch.epsilon - 0.28).abs() < 1e-15);
        assert!((ch.theta).abs() < 1e-15);
        assert!((ch.m_plus[0] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn balanced_splitter_with_unit_overlap_is_projective() {
        let swap = UnitarySpec::from_matrix(Complex2x2::from_real(0.0, 1.0, 1.0, 0.0));
        let cfg = SastomConfig::new(FRAC_1_SQRT_2, identity_arm(), swap).unwrap();
        let ch = characterize_sastom(&cfg, 1e-10).unwrap();
        assert!((ch.epsilon - 1.0).abs() < 1e-15);
        assert!((ch.theta - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(ch.phi, 0.0);
    }

    #[test]
    fn counter_rotated_preset_strength_is_sine_modulus() {
        // Strength |sin 4 eta| with direction fixed on the equator; at
        // eta = pi/8 the measurement is projective.
        let ch = characterize_sastom(&counter_rotated_config(PI / 8.0).unwrap(), 1e-10).unwrap();
        assert!((ch.epsilon - 1.0).abs() < 1e-12);
        assert!((ch.theta - FRAC_PI_2).abs() < 1e-12);

        for i in 0..=60 {
            let eta = -1.4 + 2.8 * i as f64 / 60.0;
            let ch =
                characterize_sastom(&counter_rotated_config(eta).unwrap(), 1e-10).unwrap();
            let expected = (4.0 * eta).sin().abs();
            assert!(
                (ch.epsilon - expected).abs() <= 1e-13,
                "eta={eta}: {} vs {}",
                ch.epsilon,
                expected
            );
            if ch.epsilon > 1e-12 {
                assert!((ch.theta - FRAC_PI_2).abs() <= 1e-13, "eta={eta}");
                assert!(ch.phi.abs() <= 1e-13, "eta={eta}");
            } else {
                // Degenerate convention.
                assert!((ch.theta - FRAC_PI_2).abs() < 1e-15);
                assert_eq!(ch.phi, 0.0);
            }
        }
    }

    #[test]
    fn characterization_matches_independent_eigensolver_oracle() {
        // Frozen via an independent eigendecomposition of E1 for
        // r = 0.6, u1 = plates(0.3, 1.2, 0.7), u2 = plates(2.1, 0.4, 1.5).
        let cfg = SastomConfig::new(0.6, plates(0.3, 1.2, 0.7), plates(2.1, 0.4, 1.5)).unwrap();
        let ch = characterize_sastom(&cfg, 1e-10).unwrap();
        assert!((ch.w - c(-0.035415292128030344, 0.8924333705412235)).norm() < 1e-13);
        assert!((ch.epsilon - 0.9019714769172869).abs() < 1e-13);
        assert!((ch.theta - 1.886442833315786).abs() < 1e-12);
        assert!((ch.phi - (-3.062266353214369)).abs() < 1e-12);

        let pair = build_sastom(&cfg, 1e-10).unwrap();
        let expected_m1 = Complex2x2::new(
            c(0.4812878648625703, 0.0),
            c(-0.0142066457603576, 0.3579946401166749),
            c(-0.0142066457603576, -0.3579946401166749),
            c(0.7152887590784385, 0.0),
        );
        assert!(
            pair.m1.approx_eq(&expected_m1, 1e-13),
            "{:?}",
            pair.m1
        );
    }

    #[test]
    fn balanced_plate_free_interferometer_measures_nothing() {
        let cfg = SastomConfig::new(FRAC_1_SQRT_2, identity_arm(), identity_arm()).unwrap();
        let pair = build_sastom(&cfg, 1e-10).unwrap();
        let half_identity = Complex2x2::identity().scale(FRAC_1_SQRT_2);
        assert!(pair.m1.approx_eq(&half_identity, 1e-15));
        assert!(pair.m2.approx_eq(&half_identity, 1e-15));
        assert!(pair.characterization.epsilon < 1e-15);
        assert!((pair.characterization.theta - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn full_reflection_is_the_polarizing_projection() {
        let cfg = SastomConfig::new(1.0, identity_arm(), identity_arm()).unwrap();
        let pair = build_sastom(&cfg, 1e-10).unwrap();
        assert!(pair.m1.approx_eq(&Complex2x2::from_real(1.0, 0.0, 0.0, 0.0), 1e-15));
        assert!(pair.m2.approx_eq(&Complex2x2::from_real(0.0, 0.0, 0.0, 1.0), 1e-15));
        assert!((pair.characterization.epsilon - 1.0).abs() < 1e-15);
        // Compensation restores the raw branches.
        let (x1, x2) = cfg.interferometer_branches(1e-10).unwrap();
        assert!((pair.v1.adjoint() * pair.m1).approx_eq(&x1, 1e-14));
        assert!((pair.v2.adjoint() * pair.m2).approx_eq(&x2, 1e-14));
    }

    fn random_config(state: &mut u64) -> SastomConfig {
        let mut next = || {
            *state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (*state >> 11) as f64 / (1u64 << 53) as f64
        };
        SastomConfig::new(
            next(),
            UnitarySpec::Plates(PlateStack::new(PI * next(), PI * next(), PI * next()).unwrap()),
            UnitarySpec::Plates(PlateStack::new(PI * next(), PI * next(), PI * next()).unwrap()),
        )
        .unwrap()
    }

    #[test]
    fn dual_paths_agree_on_random_configurations() {
        let mut state = 2024u64;
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let cfg = random_config(&mut state);
            worst = worst.max(dual_path_deviation(&cfg, 1e-10).unwrap());
        }
        assert!(worst <= 1e-10, "worst dual-path deviation {worst:.3e}");
    }

    #[test]
    fn pair_invariants_hold_on_random_configurations() {
        let mut state = 515u64;
        for _ in 0..200 {
            let cfg = random_config(&mut state);
            let pair = build_sastom(&cfg, 1e-10).unwrap();
            let e1 = pair.m1.adjoint() * pair.m1;
            let e2 = pair.m2.adjoint() * pair.m2;
            // Completeness and unit effect traces.
            assert!((e1 + e2).approx_eq(&Complex2x2::identity(), 1e-12));
            assert!((e1.trace().re - 1.0).abs() < 1e-12);
            assert!((e2.trace().re - 1.0).abs() < 1e-12);
            // The two operators share an eigenbasis.
            let comm = pair.m1 * pair.m2 - pair.m2 * pair.m1;
            assert!(comm.fro_norm() < 1e-12);
            // Compensation restores the raw branches.
            let (x1, x2) = cfg.interferometer_branches(1e-10).unwrap();
            assert!((pair.v1.adjoint() * pair.m1).approx_eq(&x1, 1e-12));
            assert!((pair.v2.adjoint() * pair.m2).approx_eq(&x2, 1e-12));
            // Indistinguishability identity.
            let eps = pair.characterization.epsilon;
            assert!(
                (indistinguishability(&pair) - 0.5 * (1.0 - eps * eps)).abs() < 1e-12
            );
            // Direction basis orthonormal.
            assert!(
                vec_inner(pair.characterization.m_plus, pair.characterization.m_minus).norm()
                    < 1e-12
            );
        }
    }

    #[test]
    fn strength_near_balanced_splitter_stays_fully_accurate() {
        // Near r = 1/sqrt(2) the naive sqrt(1 - 4 r^2 t^2 (1 - |w|^2)) loses
        // half its digits; the stable form must track |sin 4 eta| to 1e-13.
        for &eta in &[1e-4, 1e-6, 1e-8, 0.19634954084936207] {
            let ch =
                characterize_sastom(&counter_rotated_config(eta).unwrap(), 1e-10).unwrap();
            assert!(
                (ch.epsilon - (4.0 * eta).sin().abs()).abs() < 1e-13,
                "eta={eta:e}: eps={:e}",
                ch.epsilon
            );
        }
    }

    #[test]
    fn strength_construction_hits_the_documented_limits() {
        let proj = sastom_from_strength(1.0, 0.0, 0.0).unwrap();
        assert!(proj.m1.approx_eq(&Complex2x2::from_real(1.0, 0.0, 0.0, 0.0), 1e-15));
        assert!(proj.m2.approx_eq(&Complex2x2::from_real(0.0, 0.0, 0.0, 1.0), 1e-15));

        let nothing = sastom_from_strength(0.0, 1.1, 0.7).unwrap();
        let half_identity = Complex2x2::identity().scale(FRAC_1_SQRT_2);
        assert!(nothing.m1.approx_eq(&half_identity, 1e-15));
        assert!(nothing.m2.approx_eq(&half_identity, 1e-15));

        let partial = sastom_from_strength(0.6, FRAC_PI_2, 0.0).unwrap();
        let e1 = partial.m1.adjoint() * partial.m1;
        let e2 = partial.m2.adjoint() * partial.m2;
        assert!((hs_inner(&e1, &e2).re - 0.32).abs() < 1e-15);
        assert!(partial.v1.approx_eq(&Complex2x2::identity(), 0.0));
    }

    #[test]
    fn strength_construction_validates_ranges() {
        assert!(matches!(
            sastom_from_strength(1.2, 0.0, 0.0),
            Err(Error::OutOfRange { name: "epsilon", .. })
        ));
        assert!(matches!(
            sastom_from_strength(0.5, -0.1, 0.0),
            Err(Error::OutOfRange { name: "theta", .. })
        ));
        assert!(matches!(
            sastom_from_strength(0.5, 0.5, 4.0),
            Err(Error::OutOfRange { name: "phi", .. })
        ));
    }

    #[test]
    fn canonical_overlap_reproduces_strength_and_direction() {
        // Feeding the canonical overlap back through the characterization
        // must return the original (epsilon, theta, phi).
        for &(eps, theta, phi) in &[
            (0.3, 0.8, 1.9),
            (0.85, 2.4, -2.0),
            (1.0, FRAC_PI_2, PI),
            (0.5, 1.0e-3, 0.4),
        ] {
            let w = overlap_for(eps, theta, phi);
            let u = eps * theta.cos();
            let ch = characterize_from_overlap(u, w);
            assert!((ch.epsilon - eps).abs() < 1e-12, "eps {eps}");
            assert!((ch.theta - theta).abs() < 1e-9, "theta {theta}");
            assert!(fold_angle(ch.phi - phi).abs() < 1e-12, "phi {phi}");
        }
    }
}
