//! General (asymmetric) two-outcome measurements: a second beam splitter of
//! reflectivity `r'` mixes the two outputs of a symmetric two-outcome stage,
//! turning the effect spectrum `{(1+e)/2, (1-e)/2}` into two independent
//! weights `p`, `q`:
//!
//! ```text
//! sqrt(p) = r' c+ + t' c-        sqrt(q) = r' c- + t' c+
//! ```
//!
//! with `c± = sqrt((1±e)/2)`. The first mixed branch `X1' = r' M1 + t' M2`
//! is already positive; the second, `X2' = t' M1 - r' M2`, needs a
//! compensation gate `S` (a phase-shift gate in the direction basis exactly
//! when `sqrt(1-e^2) <= 2 r' t'`, the identity up to phase otherwise).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat2::{hs_inner, vec_inner, Complex2x2};
use crate::optics::SastomConfig;
use crate::sastom::{build_sastom, SastomCharacterization};

/// A symmetric stage plus the second splitter's reflectivity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GtomRepr", into = "GtomRepr")]
pub struct GtomConfig {
    pub sastom: SastomConfig,
    pub r_prime: f64,
}

#[derive(Serialize, Deserialize)]
struct GtomRepr {
    #[serde(flatten)]
    sastom: SastomConfig,
    #[serde(rename = "rPrime")]
    r_prime: f64,
}

impl TryFrom<GtomRepr> for GtomConfig {
    type Error = Error;
    fn try_from(r: GtomRepr) -> Result<Self> {
        Self::new(r.sastom, r.r_prime)
    }
}

impl From<GtomConfig> for GtomRepr {
    fn from(c: GtomConfig) -> Self {
        Self {
            sastom: c.sastom,
            r_prime: c.r_prime,
        }
    }
}

impl GtomConfig {
    pub fn new(sastom: SastomConfig, r_prime: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r_prime) {
            return Err(Error::OutOfRange {
                name: "rPrime",
                value: r_prime,
                range: "[0, 1]",
            });
        }
        Ok(Self { sastom, r_prime })
    }

    pub fn t_prime(&self) -> f64 {
        ((1.0 - self.r_prime) * (1.0 + self.r_prime)).sqrt()
    }
}

/// Built asymmetric two-outcome measurement.
#[derive(Clone, Copy, Debug)]
pub struct GtomResult {
    pub m1: Complex2x2,
    pub m2: Complex2x2,
    /// Compensation gate restoring positivity of the second branch:
    /// `M2 = S X2'`.
    pub s_gate: Complex2x2,
    /// Weight of the `m_plus` direction in the first effect operator.
    pub p: f64,
    /// Weight of the `m_minus` direction in the first effect operator.
    pub q: f64,
    /// Trace imbalance `p + q - 1` between the two effects.
    pub delta: f64,
    pub characterization: SastomCharacterization,
}

/// Qualitative form of the compensation gate, judged in the direction basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SGateKind {
    /// Diagonal signs `(+, -)` in the direction basis.
    PhaseShift,
    /// Equal diagonal signs: proportional to the identity.
    IdentityUpToPhase,
}

impl GtomResult {
    /// Classify the compensation gate by the signs of its diagonal in the
    /// direction basis.
    pub fn s_gate_kind(&self) -> SGateKind {
        let ch = &self.characterization;
        let d_plus = vec_inner(ch.m_plus, self.s_gate.apply(ch.m_plus)).re;
        let d_minus = vec_inner(ch.m_minus, self.s_gate.apply(ch.m_minus)).re;
        if d_plus * d_minus < 0.0 {
            SGateKind::PhaseShift
        } else {
            SGateKind::IdentityUpToPhase
        }
    }

    pub fn effects(&self) -> (Complex2x2, Complex2x2) {
        (
            self.m1.adjoint() * self.m1,
            self.m2.adjoint() * self.m2,
        )
    }
}

/// Whether the compensation gate is predicted to be a phase-shift gate:
/// `sqrt(1-e^2) <= 2 r' t'`, equivalently `(1-e)/2 <= r'^2 <= (1+e)/2`.
pub fn phase_gate_predicted(epsilon: f64, r_prime: f64) -> bool {
    let t_prime = ((1.0 - r_prime) * (1.0 + r_prime)).sqrt();
    ((1.0 - epsilon) * (1.0 + epsilon)).sqrt() <= 2.0 * r_prime * t_prime
}

/// Signed distance to the phase-gate boundary (positive inside the
/// phase-gate region); useful for classifying near-boundary configs.
pub fn phase_gate_margin(epsilon: f64, r_prime: f64) -> f64 {
    let t_prime = ((1.0 - r_prime) * (1.0 + r_prime)).sqrt();
    2.0 * r_prime * t_prime - ((1.0 - epsilon) * (1.0 + epsilon)).sqrt()
}

pub fn build_gtom(cfg: &GtomConfig, tol: f64) -> Result<GtomResult> {
    let pair = build_sastom(&cfg.sastom, tol)?;
    let r_prime = cfg.r_prime;
    let t_prime = cfg.t_prime();

    let x1p = pair.m1.scale(r_prime) + pair.m2.scale(t_prime);
    let x2p = pair.m1.scale(t_prime) - pair.m2.scale(r_prime);

    let epsilon = pair.characterization.epsilon;
    let c_plus = (0.5 * (1.0 + epsilon)).sqrt();
    let c_minus = (0.5 * (1.0 - epsilon)).max(0.0).sqrt();
    let sqrt_p = r_prime * c_plus + t_prime * c_minus;
    let sqrt_q = r_prime * c_minus + t_prime * c_plus;
    let p = sqrt_p * sqrt_p;
    let q = sqrt_q * sqrt_q;

    let polar = x2p.right_polar_decompose();
    let result = GtomResult {
        m1: x1p,
        m2: polar.positive,
        s_gate: polar.unitary,
        p,
        q,
        delta: p + q - 1.0,
        characterization: pair.characterization,
    };

    // The first branch is positive as built, and its effect spectrum is
    // exactly {p, q}.
    debug_assert!(
        x1p.is_psd(1e-10)
            && match (x1p.adjoint() * x1p).hermitian_eigensystem(1e-9) {
                Ok(eig) =>
                    (eig.values[0] - p.max(q)).abs() <= 1e-10
                        && (eig.values[1] - p.min(q)).abs() <= 1e-10,
                Err(_) => false,
            },
        "first-branch weights disagree with coefficient formulas"
    );
    Ok(result)
}

/// `Tr(E1'^H E2')`; equals `p(1-p) + q(1-q)` for every configuration.
pub fn indistinguishability(result: &GtomResult) -> f64 {
    let (e1, e2) = result.effects();
    hs_inner(&e1, &e2).re
}

/// Configuration whose built measurement keeps one outcome noiseless
/// (`q = 1`): detecting outcome 2 collapses the state onto `m_plus`
/// with weight `1 - p`, while outcome 1 leaves a partially-collapsed state.
///
/// Realized by `epsilon = sqrt(1-p)` and `r'^2 = (1-epsilon)/2`.
pub fn partial_collapse(p: f64, theta: f64, phi: f64) -> Result<GtomConfig> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            range: "[0, 1]",
        });
    }
    let epsilon = (1.0 - p).sqrt();
    let r_prime = (0.5 * (1.0 - epsilon)).sqrt();
    let sastom = crate::inverse::solve_sastom_params(&crate::inverse::SastomTarget {
        epsilon,
        theta,
        phi,
    })?;
    GtomConfig::new(sastom, r_prime)
}
