//! Ancilla-assisted two-outcome measurements on a stationary qubit.
//!
//! An ancilla prepared as `alpha|0> + beta|1>` (`beta = sqrt(1 - alpha^2)`)
//! is entangled with the measured qubit by a partial controlled-NOT — on the
//! measured qubit's second superposition-basis branch the ancilla is rotated
//! by `exp(i xi tau_x)` — and then read out in its computational basis.
//! Readout `n` applies the branch operator
//!
//! ```text
//! X_0 = alpha |+><+| + (alpha cos(xi) + i beta sin(xi)) |-><-|
//! X_1 = beta  |+><+| + (i alpha sin(xi) + beta cos(xi)) |-><-|
//! ```
//!
//! to the measured qubit. Their positive parts have the closed forms
//! `M_0 = diag(alpha, sqrt(1 - alpha'^2))`, `M_1 = diag(beta, alpha')` with
//! `alpha' = sqrt([1 - (2 alpha^2 - 1) cos(2 xi)]/2)`, evaluated here in the
//! cancellation-free form `alpha' = hypot(alpha sin(xi), beta cos(xi))`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::StagePair;
use crate::error::{Error, Result};
use crate::mat2::Complex2x2;

/// Label of the measured-qubit basis the operators are expressed in. The
/// superposition basis is mapped onto the canonical first/second vector
/// components, exactly like the polarization basis of the optical stages.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum MeasuredBasis {
    #[default]
    PlusMinus,
}

/// Ancilla amplitude and partial controlled-NOT angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SolidStateRepr", into = "SolidStateRepr")]
pub struct SolidStateConfig {
    pub alpha: f64,
    pub xi: f64,
    pub basis: MeasuredBasis,
}

#[derive(Serialize, Deserialize)]
struct SolidStateRepr {
    alpha: f64,
    xi: f64,
    #[serde(default)]
    basis: MeasuredBasis,
}

impl TryFrom<SolidStateRepr> for SolidStateConfig {
    type Error = Error;
    fn try_from(r: SolidStateRepr) -> Result<Self> {
        let mut cfg = Self::new(r.alpha, r.xi)?;
        cfg.basis = r.basis;
        Ok(cfg)
    }
}

impl From<SolidStateConfig> for SolidStateRepr {
    fn from(c: SolidStateConfig) -> Self {
        Self {
            alpha: c.alpha,
            xi: c.xi,
            basis: c.basis,
        }
    }
}

impl SolidStateConfig {
    pub fn new(alpha: f64, xi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::OutOfRange {
                name: "alpha",
                value: alpha,
                range: "[0, 1]",
            });
        }
        if !xi.is_finite() {
            return Err(Error::OutOfRange {
                name: "xi",
                value: xi,
                range: "finite radians",
            });
        }
        Ok(Self {
            alpha,
            xi,
            basis: MeasuredBasis::PlusMinus,
        })
    }

    /// Complementary ancilla amplitude `sqrt(1 - alpha^2)`.
    pub fn beta(&self) -> f64 {
        ((1.0 - self.alpha) * (1.0 + self.alpha)).sqrt()
    }
}

/// Positive measurement operators, their correction unitaries, and the
/// effective amplitude of the rotated branch.
#[derive(Clone, Copy, Debug)]
pub struct SolidStateResult {
    /// Positive part of the readout-0 branch: `diag(alpha, sqrt(1-alpha'^2))`.
    pub m0: Complex2x2,
    /// Positive part of the readout-1 branch: `diag(beta, alpha')`.
    pub m1: Complex2x2,
    /// Unitary `W_0` with `M_0 = W_0 X_0`, applied after readout 0.
    pub correction0: Complex2x2,
    /// Unitary `W_1` with `M_1 = W_1 X_1`, applied after readout 1.
    pub correction1: Complex2x2,
    /// `sqrt([1 - (2 alpha^2 - 1) cos(2 xi)]/2)`.
    pub alpha_prime: f64,
    pub basis: MeasuredBasis,
}

impl SolidStateResult {
    /// Largest entry of `M_0^H M_0 + M_1^H M_1 - I`.
    pub fn completeness_defect(&self) -> f64 {
        let sum = self.m0.adjoint() * self.m0 + self.m1.adjoint() * self.m1;
        sum.max_abs_diff(&Complex2x2::identity())
    }

    /// The pair in cascade form: readout 0 fires, readout 1 advances.
    pub fn to_stage_pair(&self) -> StagePair {
        StagePair {
            click: self.m0,
            advance: self.m1,
        }
    }
}

/// The explicit circuit branch operators `X_n`, both diagonal in the
/// measured basis.
pub fn circuit_branches(cfg: &SolidStateConfig) -> (Complex2x2, Complex2x2) {
    let (alpha, beta) = (cfg.alpha, cfg.beta());
    let (s, c) = cfg.xi.sin_cos();
    let x0 = Complex2x2::diagonal(
        Complex64::new(alpha, 0.0),
        Complex64::new(alpha * c, beta * s),
    );
    let x1 = Complex2x2::diagonal(
        Complex64::new(beta, 0.0),
        Complex64::new(beta * c, alpha * s),
    );
    (x0, x1)
}

/// Build the measurement realized by a partial controlled-NOT of angle `xi`
/// with ancilla amplitude `alpha`: closed-form positive operators plus the
/// correction unitaries from the polar decomposition of the raw branches.
pub fn partial_cnot_measurement(cfg: &SolidStateConfig) -> Result<SolidStateResult> {
    let checked = SolidStateConfig::new(cfg.alpha, cfg.xi)?;
    let (alpha, beta) = (checked.alpha, checked.beta());
    let (s, c) = checked.xi.sin_cos();
    let alpha_prime = f64::hypot(alpha * s, beta * c);
    let co_prime = f64::hypot(alpha * c, beta * s);

    let m0 = Complex2x2::diagonal(
        Complex64::new(alpha, 0.0),
        Complex64::new(co_prime, 0.0),
    );
    let m1 = Complex2x2::diagonal(
        Complex64::new(beta, 0.0),
        Complex64::new(alpha_prime, 0.0),
    );

    let (x0, x1) = circuit_branches(&checked);
    let polar0 = x0.right_polar_decompose();
    let polar1 = x1.right_polar_decompose();
    debug_assert!(
        polar0.positive.max_abs_diff(&m0) < 1e-10
            && polar1.positive.max_abs_diff(&m1) < 1e-10,
        "decomposition path disagrees with the closed forms"
    );

    Ok(SolidStateResult {
        m0,
        m1,
        correction0: polar0.unitary,
        correction1: polar1.unitary,
        alpha_prime,
        basis: cfg.basis,
    })
}

/// The full controlled-NOT case `xi = pi/2`: a symmetric two-outcome
/// measurement in the superposition basis with strength `|2 alpha^2 - 1|`.
pub fn cnot_measurement(alpha: f64) -> Result<SolidStateResult> {
    partial_cnot_measurement(&SolidStateConfig::new(
        alpha,
        std::f64::consts::FRAC_PI_2,
    )?)
}
