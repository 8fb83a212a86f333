//! Polarization qubit states, Pauli operators, and the dictionary between
//! rank-1 projectors and direction angles on the Bloch sphere.
//!
//! The measurement basis used throughout is
//! `m_plus  = (cos(theta/2), e^{-i phi/2} sin(theta/2))` and
//! `m_minus = (-e^{i phi/2} sin(theta/2), cos(theta/2))`,
//! an orthonormal pair for every `(theta, phi)`. The projector onto `m_plus`
//! has Bloch vector
//! `(sin(theta) cos(phi/2), -sin(theta) sin(phi/2), cos(theta))`,
//! so the azimuth on the sphere is `-phi/2`, not `phi`; the recovery formulas
//! below account for that.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat2::{canonical_phase, vec_inner, Complex2x2};

const NORM_FLOOR: f64 = 1e-12;

/// A normalized single-photon polarization state with a canonical global
/// phase: the horizontal amplitude is real and positive when it is
/// significant, otherwise the vertical amplitude is.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateRepr", into = "StateRepr")]
pub struct PolarizationState {
    c_h: Complex64,
    c_v: Complex64,
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    #[serde(rename = "cH")]
    c_h: [f64; 2],
    #[serde(rename = "cV")]
    c_v: [f64; 2],
}

impl TryFrom<StateRepr> for PolarizationState {
    type Error = Error;
    fn try_from(r: StateRepr) -> Result<Self> {
        Self::new(
            Complex64::new(r.c_h[0], r.c_h[1]),
            Complex64::new(r.c_v[0], r.c_v[1]),
        )
    }
}

impl From<PolarizationState> for StateRepr {
    fn from(s: PolarizationState) -> Self {
        Self {
            c_h: [s.c_h.re, s.c_h.im],
            c_v: [s.c_v.re, s.c_v.im],
        }
    }
}

impl PolarizationState {
    /// Normalizes the amplitudes and fixes the global phase. Rejects vectors
    /// whose norm is below `1e-12`.
    pub fn new(c_h: Complex64, c_v: Complex64) -> Result<Self> {
        let norm = (c_h.norm_sqr() + c_v.norm_sqr()).sqrt();
        if !norm.is_finite() || norm < NORM_FLOOR {
            return Err(Error::UnnormalizableState { norm });
        }
        let v = canonical_phase([c_h / norm, c_v / norm]);
        Ok(Self { c_h: v[0], c_v: v[1] })
    }

    pub fn from_vector(v: [Complex64; 2]) -> Result<Self> {
        Self::new(v[0], v[1])
    }

    pub fn horizontal() -> Self {
        Self {
            c_h: Complex64::new(1.0, 0.0),
            c_v: Complex64::new(0.0, 0.0),
        }
    }

    pub fn vertical() -> Self {
        Self {
            c_h: Complex64::new(0.0, 0.0),
            c_v: Complex64::new(1.0, 0.0),
        }
    }

    pub fn diagonal() -> Self {
        Self {
            c_h: Complex64::new(FRAC_1_SQRT_2, 0.0),
            c_v: Complex64::new(FRAC_1_SQRT_2, 0.0),
        }
    }

    pub fn antidiagonal() -> Self {
        Self {
            c_h: Complex64::new(FRAC_1_SQRT_2, 0.0),
            c_v: Complex64::new(-FRAC_1_SQRT_2, 0.0),
        }
    }

    pub fn right_circular() -> Self {
        Self {
            c_h: Complex64::new(FRAC_1_SQRT_2, 0.0),
            c_v: Complex64::new(0.0, -FRAC_1_SQRT_2),
        }
    }

    pub fn left_circular() -> Self {
        Self {
            c_h: Complex64::new(FRAC_1_SQRT_2, 0.0),
            c_v: Complex64::new(0.0, FRAC_1_SQRT_2),
        }
    }

    pub fn coefficients(&self) -> [Complex64; 2] {
        [self.c_h, self.c_v]
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        vec_inner(self.coefficients(), other.coefficients())
    }

    pub fn projector(&self) -> Complex2x2 {
        Complex2x2::outer(self.coefficients(), self.coefficients())
    }

    pub fn bloch_vector(&self) -> BlochVector {
        let cross = self.c_h * self.c_v.conj();
        BlochVector {
            x: 2.0 * cross.re,
            y: -2.0 * cross.im,
            z: self.c_h.norm_sqr() - self.c_v.norm_sqr(),
        }
    }
}

/// A point of the Bloch ball in Cartesian coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

pub fn pauli_x() -> Complex2x2 {
    Complex2x2::from_real(0.0, 1.0, 1.0, 0.0)
}

pub fn pauli_y() -> Complex2x2 {
    Complex2x2::new(
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, 0.0),
    )
}

pub fn pauli_z() -> Complex2x2 {
    Complex2x2::from_real(1.0, 0.0, 0.0, -1.0)
}

/// Fold an angle into `(-pi, pi]`.
pub fn fold_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// The orthonormal direction pair for polar angle `theta` and half-phase
/// `alpha`:
/// `m_plus = (cos(theta/2), e^{-i alpha} sin(theta/2))`,
/// `m_minus = (-e^{i alpha} sin(theta/2), cos(theta/2))`.
///
/// The half-phase determines the Bloch azimuth of `m_plus` as `-alpha`; it
/// has full period `2 pi`, whereas the reported scalar `phi = 2 alpha` folded
/// into `(-pi, pi]` identifies the basis only up to the sign of the
/// off-diagonal projector entry.
pub fn basis_from_half_phase(theta: f64, alpha: f64) -> ([Complex64; 2], [Complex64; 2]) {
    let (s, c) = (0.5 * theta).sin_cos();
    let half_phase = Complex64::from_polar(1.0, alpha);
    let m_plus = [Complex64::new(c, 0.0), half_phase.conj() * s];
    let m_minus = [-half_phase * s, Complex64::new(c, 0.0)];
    (m_plus, m_minus)
}

/// The orthonormal measurement direction pair for `(theta, phi)`:
/// `(m_plus, m_minus)` with half-phase `phi/2`.
pub fn measurement_basis(theta: f64, phi: f64) -> ([Complex64; 2], [Complex64; 2]) {
    basis_from_half_phase(theta, 0.5 * phi)
}

/// Recover `(theta, alpha)` from a rank-1 projector, where `alpha` is the
/// half-phase of the direction basis (`alpha = arg P01`, in `(-pi, pi]`).
/// Unlike the folded `phi`, rebuilding from `(theta, alpha)` always
/// reproduces the projector.
pub fn projector_axis(p: &Complex2x2) -> Result<(f64, f64)> {
    let b = bloch_of_projector(p)?;
    let theta = b.z.clamp(-1.0, 1.0).acos();
    let alpha = if f64::hypot(b.x, b.y) < 1e-12 {
        0.0
    } else {
        p.at(0, 1).arg()
    };
    Ok((theta, alpha))
}

/// Projector onto `m_plus(theta, phi)`.
pub fn projector_from_angles(theta: f64, phi: f64) -> Complex2x2 {
    let (m_plus, _) = measurement_basis(theta, phi);
    Complex2x2::outer(m_plus, m_plus)
}

/// Bloch vector `(Tr P sx, Tr P sy, Tr P sz)` of a rank-1 projector.
///
/// Validates Hermiticity, idempotence, and unit trace at absolute tolerance
/// `1e-8`.
pub fn bloch_of_projector(p: &Complex2x2) -> Result<BlochVector> {
    let herm = p.hermiticity_defect();
    let idem = (*p * *p).max_abs_diff(p);
    let tr = (p.trace() - Complex64::new(1.0, 0.0)).norm();
    let deviation = herm.max(idem).max(tr);
    if deviation > 1e-8 {
        return Err(Error::NotProjector { deviation });
    }
    Ok(BlochVector {
        x: 2.0 * p.at(0, 1).re,
        y: -2.0 * p.at(0, 1).im,
        z: p.at(0, 0).re - p.at(1, 1).re,
    })
}

/// Recover `(theta, phi)` with `theta` in `[0, pi]` and `phi` in `(-pi, pi]`
/// such that `projector_from_angles(theta, phi)` reproduces the input.
///
/// On the poles (`sin(theta)` negligible) the azimuth is unidentifiable and is
/// reported as `0`.
pub fn projector_angles(p: &Complex2x2) -> Result<(f64, f64)> {
    let b = bloch_of_projector(p)?;
    let theta = b.z.clamp(-1.0, 1.0).acos();
    let planar = f64::hypot(b.x, b.y);
    let phi = if planar < 1e-12 {
        0.0
    } else {
        fold_angle(-2.0 * f64::atan2(b.y, b.x))
    };
    Ok((theta, phi))
}

/// Convenience: the state vector for `m_plus(theta, phi)`.
pub fn state_from_angles(theta: f64, phi: f64) -> PolarizationState {
    let (m_plus, _) = measurement_basis(theta, phi);
    // m_plus is unit-norm by construction.
    PolarizationState::from_vector(m_plus).expect("unit vector")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat2::{hs_inner, vec_norm};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constructor_normalizes_and_fixes_phase() {
        // 3-4-5 amplitudes with a global phase of i: the phase must cancel.
        let s = PolarizationState::new(c(0.0, 3.0), c(0.0, 4.0)).unwrap();
        let [h, v] = s.coefficients();
        assert!((h - c(0.6, 0.0)).norm() < 1e-15);
        assert!((v - c(0.8, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn constructor_moves_phase_to_vertical_when_horizontal_vanishes() {
        let s = PolarizationState::new(c(0.0, 0.0), c(0.0, -2.0)).unwrap();
        let [h, v] = s.coefficients();
        assert!(h.norm() < 1e-15);
        assert!((v - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn constructor_rejects_null_vector() {
        assert!(matches!(
            PolarizationState::new(c(0.0, 0.0), c(1e-13, 0.0)),
            Err(Error::UnnormalizableState { .. })
        ));
    }

    #[test]
    fn preset_bloch_vectors_hit_the_axes() {
        let cases = [
            (PolarizationState::horizontal(), [0.0, 0.0, 1.0]),
            (PolarizationState::vertical(), [0.0, 0.0, -1.0]),
            (PolarizationState::diagonal(), [1.0, 0.0, 0.0]),
            (PolarizationState::antidiagonal(), [-1.0, 0.0, 0.0]),
            // Jones-vector conventions: (1, -i)/sqrt(2) sits at y = -1.
            (PolarizationState::right_circular(), [0.0, -1.0, 0.0]),
            (PolarizationState::left_circular(), [0.0, 1.0, 0.0]),
        ];
        for (state, expected) in cases {
            let b = state.bloch_vector().as_array();
            for (got, want) in b.iter().zip(expected.iter()) {
                assert!((got - want).abs() < 1e-15, "{b:?} vs {expected:?}");
            }
        }
    }

    #[test]
    fn pauli_operators_are_traceless_involutions() {
        for sigma in [pauli_x(), pauli_y(), pauli_z()] {
            assert!(sigma.trace().norm() < 1e-15);
            assert!((sigma * sigma).approx_eq(&Complex2x2::identity(), 1e-15));
            assert!(sigma.is_hermitian(1e-15));
        }
        // Mutually orthogonal under the Hilbert-Schmidt product.
        assert!(hs_inner(&pauli_x(), &pauli_y()).norm() < 1e-15);
        assert!(hs_inner(&pauli_y(), &pauli_z()).norm() < 1e-15);
        assert!(hs_inner(&pauli_z(), &pauli_x()).norm() < 1e-15);
    }

    #[test]
    fn measurement_basis_is_orthonormal_everywhere() {
        for i in 0..40 {
            for j in 0..40 {
                let theta = PI * i as f64 / 39.0;
                let phi = -PI + 2.0 * PI * j as f64 / 39.0;
                let (mp, mm) = measurement_basis(theta, phi);
                assert!((vec_norm(mp) - 1.0).abs() < 1e-14);
                assert!((vec_norm(mm) - 1.0).abs() < 1e-14);
                assert!(vec_inner(mp, mm).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn bloch_vector_of_direction_projector_matches_half_angle_formula() {
        // theta = pi/3, phi = pi/4. Independently computed amplitudes and
        // Bloch components (the sphere azimuth is -phi/2):
        //   m_plus = (0.8660254037844387, 0.4619397662556433 - 0.1913417161825449 i)
        //   bloch  = (0.8001031451912655, -0.3314135740355918, 0.5)
        let theta = PI / 3.0;
        let phi = PI / 4.0;
        let (mp, _) = measurement_basis(theta, phi);
        assert!((mp[0] - c(0.8660254037844387, 0.0)).norm() < 1e-15);
        assert!((mp[1] - c(0.4619397662556433, -0.1913417161825449)).norm() < 1e-15);

        let b = bloch_of_projector(&projector_from_angles(theta, phi)).unwrap();
        assert!((b.x - 0.8001031451912655).abs() < 1e-15);
        assert!((b.y + 0.3314135740355918).abs() < 1e-15);
        assert!((b.z - 0.5).abs() < 1e-15);
        assert!((b.norm() - 1.0).abs() < 1e-14);

        // Cross-check against the closed-form direction components.
        assert!((b.x - theta.sin() * (0.5 * phi).cos()).abs() < 1e-15);
        assert!((b.y + theta.sin() * (0.5 * phi).sin()).abs() < 1e-15);
        assert!((b.z - theta.cos()).abs() < 1e-15);
    }

    #[test]
    fn angles_round_trip_through_projector() {
        for i in 0..60 {
            for j in 0..=60 {
                let theta = PI * (i as f64 + 0.5) / 60.0;
                // phi strictly inside (-pi, pi] including the endpoint pi.
                let phi = -PI + 2.0 * PI * j as f64 / 60.0;
                let phi = if j == 0 { PI } else { phi };
                let p = projector_from_angles(theta, phi);
                let (th, ph) = projector_angles(&p).unwrap();
                assert!((th - theta).abs() < 1e-12, "theta {theta} -> {th}");
                let dphi = fold_angle(ph - phi).abs();
                assert!(dphi < 1e-11, "phi {phi} -> {ph}");
            }
        }
    }

    #[test]
    fn pole_projectors_report_zero_azimuth() {
        let (th, ph) = projector_angles(&projector_from_angles(0.0, 2.3)).unwrap();
        assert_eq!(ph, 0.0);
        assert!(th.abs() < 1e-15);
        let (th, ph) = projector_angles(&projector_from_angles(PI, -1.2)).unwrap();
        assert_eq!(ph, 0.0);
        assert!((th - PI).abs() < 1e-7);
    }

    #[test]
    fn bloch_of_projector_rejects_non_projectors() {
        let half = Complex2x2::identity().scale(0.5);
        assert!(matches!(
            bloch_of_projector(&half),
            Err(Error::NotProjector { .. })
        ));
        let stretched = Complex2x2::diagonal(c(1.5, 0.0), c(0.0, 0.0));
        assert!(matches!(
            bloch_of_projector(&stretched),
            Err(Error::NotProjector { .. })
        ));
    }

    #[test]
    fn fold_angle_lands_in_half_open_interval() {
        assert!((fold_angle(3.0 * PI) - PI).abs() < 1e-15);
        assert!((fold_angle(-PI) - PI).abs() < 1e-15);
        assert!((fold_angle(2.0 * PI)).abs() < 1e-15);
        assert!((fold_angle(PI + 0.1) - (-PI + 0.1)).abs() < 1e-12);
        for k in -6..=6 {
            let a = 0.7 + 2.0 * PI * k as f64;
            assert!((fold_angle(a) - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn serde_round_trip_uses_named_amplitudes() {
        let s = PolarizationState::new(c(1.0, 0.0), c(0.0, -1.0)).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"cH\""), "{json}");
        assert!(json.contains("\"cV\""), "{json}");
        let back: PolarizationState = serde_json::from_str(&json).unwrap();
        assert!((back.inner(&s).norm() - 1.0).abs() < 1e-14);
        // Deserialization goes through the validating constructor.
        let err = serde_json::from_str::<PolarizationState>(
            "{\"cH\":[0.0,0.0],\"cV\":[0.0,0.0]}",
        );
        assert!(err.is_err());
    }

    #[test]
    fn state_from_angles_matches_basis_vector() {
        let s = state_from_angles(1.1, -0.4);
        let (mp, _) = measurement_basis(1.1, -0.4);
        let overlap = vec_inner(s.coefficients(), mp).norm();
        assert!((overlap - 1.0).abs() < 1e-14);
    }
}
