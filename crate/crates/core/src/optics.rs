//! Linear-optical building blocks: wave-plate stacks realizing arbitrary
//! polarization unitaries, and the two-branch interferometer whose output
//! arms implement a two-outcome measurement.
//!
//! A quarter/half/quarter stack with fast-axis angles `(q1, h, q2)` produces
//! `exp(-i q1 sy) * exp(i (2h - q1 - q2) sx) * exp(i q2 sy)`, which covers all
//! of SU(2); each plate angle only matters modulo pi.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat2::Complex2x2;

/// Fast-axis angles (radians) of a quarter-wave, half-wave, quarter-wave
/// plate sequence. Angles are stored folded into `[0, pi)`; folding leaves
/// the realized unitary exactly unchanged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlateStackRepr", into = "PlateStackRepr")]
pub struct PlateStack {
    q1: f64,
    h: f64,
    q2: f64,
}

#[derive(Serialize, Deserialize)]
struct PlateStackRepr {
    q1: f64,
    h: f64,
    q2: f64,
}

impl TryFrom<PlateStackRepr> for PlateStack {
    type Error = Error;
    fn try_from(r: PlateStackRepr) -> Result<Self> {
        Self::new(r.q1, r.h, r.q2)
    }
}

impl From<PlateStack> for PlateStackRepr {
    fn from(p: PlateStack) -> Self {
        Self {
            q1: p.q1,
            h: p.h,
            q2: p.q2,
        }
    }
}

impl PlateStack {
    pub fn new(q1: f64, h: f64, q2: f64) -> Result<Self> {
        for (name, value) in [("q1", q1), ("h", h), ("q2", q2)] {
            if !value.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "plate angle {name} must be finite, got {value}"
                )));
            }
        }
        Ok(Self {
            q1: q1.rem_euclid(PI),
            h: h.rem_euclid(PI),
            q2: q2.rem_euclid(PI),
        })
    }

    /// Stack realizing the rotation `exp(-i beta sy)` (real rotation matrix
    /// by angle `beta` in the H/V plane).
    pub fn for_y_rotation(beta: f64) -> Result<Self> {
        Self::new(beta, 0.5 * beta, 0.0)
    }

    pub fn angles(&self) -> (f64, f64, f64) {
        (self.q1, self.h, self.q2)
    }

    /// The realized Jones matrix. The product of the three plate matrices has
    /// unit determinant analytically; any numerical residue of a global phase
    /// is stripped.
    pub fn unitary(&self) -> Complex2x2 {
        let u = quarter_plate(self.q1) * half_plate(self.h) * quarter_plate(self.q2);
        let det = u.det();
        // Principal square root; for det ~ 1 this is a near-identity factor.
        let phase = det.sqrt();
        if phase.norm() > 0.0 {
            u * phase.inv()
        } else {
            u
        }
    }
}

fn rotation(angle: f64) -> Complex2x2 {
    let (s, c) = angle.sin_cos();
    Complex2x2::from_real(c, -s, s, c)
}

/// Quarter-wave plate with fast axis at `angle`: retards the slow axis by i.
pub fn quarter_plate(angle: f64) -> Complex2x2 {
    let retard = Complex2x2::diagonal(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0));
    rotation(angle) * retard * rotation(-angle)
}

/// Half-wave plate with fast axis at `angle`: flips the sign of the slow axis.
pub fn half_plate(angle: f64) -> Complex2x2 {
    let retard = Complex2x2::diagonal(Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0));
    rotation(angle) * retard * rotation(-angle)
}

/// A polarization unitary given either as plate angles or as an explicit
/// matrix (validated for unitarity when resolved).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum UnitarySpec {
    Plates(PlateStack),
    Matrix { m: Complex2x2 },
}

impl UnitarySpec {
    pub fn identity() -> Self {
        Self::Matrix {
            m: Complex2x2::identity(),
        }
    }

    pub fn from_matrix(m: Complex2x2) -> Self {
        Self::Matrix { m }
    }

    pub fn resolve(&self, tol: f64) -> Result<Complex2x2> {
        match self {
            Self::Plates(stack) => Ok(stack.unitary()),
            Self::Matrix { m } => {
                let defect = m.unitarity_defect();
                if defect > tol {
                    return Err(Error::InvalidConfig(format!(
                        "matrix is not unitary (defect {defect:.3e}, tolerance {tol:.3e})"
                    )));
                }
                Ok(*m)
            }
        }
    }
}

/// Configuration of the two-branch interferometer: a beam splitter of
/// amplitude reflectivity `r` followed by an independent polarization unitary
/// in each output arm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SastomRepr", into = "SastomRepr")]
pub struct SastomConfig {
    r: f64,
    u1: UnitarySpec,
    u2: UnitarySpec,
}

#[derive(Serialize, Deserialize)]
struct SastomRepr {
    r: f64,
    u1: UnitarySpec,
    u2: UnitarySpec,
}

impl TryFrom<SastomRepr> for SastomConfig {
    type Error = Error;
    fn try_from(r: SastomRepr) -> Result<Self> {
        Self::new(r.r, r.u1, r.u2)
    }
}

impl From<SastomConfig> for SastomRepr {
    fn from(c: SastomConfig) -> Self {
        Self {
            r: c.r,
            u1: c.u1,
            u2: c.u2,
        }
    }
}

impl SastomConfig {
    pub fn new(r: f64, u1: UnitarySpec, u2: UnitarySpec) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::OutOfRange {
                name: "r",
                value: r,
                range: "[0, 1]",
            });
        }
        Ok(Self { r, u1, u2 })
    }

    pub fn reflectivity(&self) -> f64 {
        self.r
    }

    /// Transmission amplitude `t = sqrt(1 - r^2)`, evaluated as
    /// `sqrt((1 - r)(1 + r))` to keep accuracy near `r = 1`.
    pub fn transmissivity(&self) -> f64 {
        ((1.0 - self.r) * (1.0 + self.r)).sqrt()
    }

    pub fn arm_unitaries(&self, tol: f64) -> Result<(Complex2x2, Complex2x2)> {
        Ok((self.u1.resolve(tol)?, self.u2.resolve(tol)?))
    }

    /// The raw (non-positive) branch operators of the interferometer.
    ///
    /// Branch 1 transmits the horizontal component with amplitude `r` through
    /// arm unitary `U1` and the vertical component with amplitude `t` through
    /// `U2`; branch 2 carries the complementary amplitudes `(t, -r)`. Their
    /// absolute squares always resolve the identity.
    pub fn interferometer_branches(&self, tol: f64) -> Result<(Complex2x2, Complex2x2)> {
        let (u1, u2) = self.arm_unitaries(tol)?;
        let r = Complex64::new(self.r, 0.0);
        let t = Complex64::new(self.transmissivity(), 0.0);
        let u1_h = [u1.at(0, 0), u1.at(1, 0)];
        let u2_v = [u2.at(0, 1), u2.at(1, 1)];
        let x1 = Complex2x2::from_columns(
            [r * u1_h[0], r * u1_h[1]],
            [t * u2_v[0], t * u2_v[1]],
        );
        let x2 = Complex2x2::from_columns(
            [t * u1_h[0], t * u1_h[1]],
            [-r * u2_v[0], -r * u2_v[1]],
        );
        Ok((x1, x2))
    }
}

/// Preset: balanced splitter (`r = 1/sqrt(2)`) with the two arms rotated by
/// equal and opposite angles `2 eta` about the y axis. Sweeping `eta` drives
/// the measurement continuously from the identity to a projective one.
pub fn counter_rotated_config(eta: f64) -> Result<SastomConfig> {
    SastomConfig::new(
        FRAC_1_SQRT_2,
        UnitarySpec::Plates(PlateStack::for_y_rotation(2.0 * eta)?),
        UnitarySpec::Plates(PlateStack::for_y_rotation(-2.0 * eta)?),
    )
}
