//! Tagged configuration envelope and the JSON schemas of built measurement
//! artifacts, shared by the library and the command line.
//!
//! Configs carry a `kind` tag (`sastom`, `gtom`, `chain`, `solidstate`) that
//! dispatches to the matching builder. Built artifacts are untagged and
//! recognized by shape: two-outcome results use the `M1/M2/V1/V2` pair
//! schema (plus `p/q/delta/sGate` for unbalanced pairs), cascades list the
//! `K/Y/W` operator families, and ancilla-readout results add `alphaPrime`.
//! Outcome numbering in artifact field names is 1-based.

use serde::{Deserialize, Serialize};

use crate::chain::{build_chain, ChainConfig, MultiOutcomePovm};
use crate::error::{Error, Result};
use crate::gtom::{build_gtom, GtomConfig, GtomResult};
use crate::mat2::Complex2x2;
use crate::optics::SastomConfig;
use crate::qubit::basis_from_half_phase;
use crate::sastom::{build_sastom, MeasurementPair};
use crate::solidstate::{
    partial_cnot_measurement, MeasuredBasis, SolidStateConfig, SolidStateResult,
};

/// Any buildable measurement description, dispatched by its `kind` tag.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Config {
    Sastom(SastomConfig),
    Gtom(GtomConfig),
    Chain(ChainConfig),
    Solidstate(SolidStateConfig),
}

impl Config {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Config::Sastom(_) => "sastom",
            Config::Gtom(_) => "gtom",
            Config::Chain(_) => "chain",
            Config::Solidstate(_) => "solidstate",
        }
    }

    pub fn build(&self, tol: f64) -> Result<BuiltArtifact> {
        build_config(self, tol)
    }
}

/// Two-outcome build output: operators, their correction unitaries, and the
/// strength/direction scalars. The optional fields are present exactly when
/// the pair is weight-unbalanced (built with an outcome-mixing splitter).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairArtifact {
    #[serde(rename = "M1")]
    pub m1: Complex2x2,
    #[serde(rename = "M2")]
    pub m2: Complex2x2,
    #[serde(rename = "V1")]
    pub v1: Complex2x2,
    #[serde(rename = "V2")]
    pub v2: Complex2x2,
    pub epsilon: f64,
    pub theta: f64,
    pub phi: f64,
    /// Arm overlap as `[re, im]`; its full phase (not the folded `phi`)
    /// pins the eigenbasis.
    pub w: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(rename = "sGate", default, skip_serializing_if = "Option::is_none")]
    pub s_gate: Option<Complex2x2>,
}

impl PairArtifact {
    pub fn from_pair(pair: &MeasurementPair) -> Self {
        let ch = &pair.characterization;
        Self {
            m1: pair.m1,
            m2: pair.m2,
            v1: pair.v1,
            v2: pair.v2,
            epsilon: ch.epsilon,
            theta: ch.theta,
            phi: ch.phi,
            w: [ch.w.re, ch.w.im],
            p: None,
            q: None,
            delta: None,
            s_gate: None,
        }
    }

    /// The first branch of an unbalanced pair is already positive (identity
    /// correction); the second is corrected by the compensation gate.
    pub fn from_gtom(result: &GtomResult) -> Self {
        let ch = &result.characterization;
        Self {
            m1: result.m1,
            m2: result.m2,
            v1: Complex2x2::identity(),
            v2: result.s_gate,
            epsilon: ch.epsilon,
            theta: ch.theta,
            phi: ch.phi,
            w: [ch.w.re, ch.w.im],
            p: Some(result.p),
            q: Some(result.q),
            delta: Some(result.delta),
            s_gate: Some(result.s_gate),
        }
    }
}

/// Cascade build output: outcome operators `K`, accumulated advance products
/// `Y`, and correction unitaries `W`, all of equal length.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainArtifact {
    #[serde(rename = "K")]
    pub k_ops: Vec<Complex2x2>,
    #[serde(rename = "Y")]
    pub y_ops: Vec<Complex2x2>,
    #[serde(rename = "W")]
    pub w_ops: Vec<Complex2x2>,
}

impl ChainArtifact {
    pub fn from_povm(povm: &MultiOutcomePovm) -> Self {
        Self {
            k_ops: povm.k_ops.clone(),
            y_ops: povm.y_ops.clone(),
            w_ops: povm.w_ops.clone(),
        }
    }
}

/// Ancilla-readout build output; `M1`/`V1` belong to readout 0.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolidStateArtifact {
    #[serde(rename = "M1")]
    pub m1: Complex2x2,
    #[serde(rename = "M2")]
    pub m2: Complex2x2,
    #[serde(rename = "V1")]
    pub v1: Complex2x2,
    #[serde(rename = "V2")]
    pub v2: Complex2x2,
    pub alpha_prime: f64,
    pub basis: MeasuredBasis,
}

impl SolidStateArtifact {
    pub fn from_result(result: &SolidStateResult) -> Self {
        Self {
            m1: result.m0,
            m2: result.m1,
            v1: result.correction0,
            v2: result.correction1,
            alpha_prime: result.alpha_prime,
            basis: result.basis,
        }
    }
}

/// Any build output; the variants are recognized by their JSON shape.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BuiltArtifact {
    Chain(ChainArtifact),
    SolidState(SolidStateArtifact),
    Pair(PairArtifact),
}

impl BuiltArtifact {
    /// The flat outcome-operator list, suitable for Born-rule sampling.
    pub fn operators(&self) -> Vec<Complex2x2> {
        match self {
            BuiltArtifact::Chain(chain) => chain.k_ops.clone(),
            BuiltArtifact::SolidState(ss) => vec![ss.m1, ss.m2],
            BuiltArtifact::Pair(pair) => vec![pair.m1, pair.m2],
        }
    }
}

/// Construct the measurement a config describes.
pub fn build_config(config: &Config, tol: f64) -> Result<BuiltArtifact> {
    match config {
        Config::Sastom(cfg) => {
            let pair = build_sastom(cfg, tol)?;
            Ok(BuiltArtifact::Pair(PairArtifact::from_pair(&pair)))
        }
        Config::Gtom(cfg) => {
            let result = build_gtom(cfg, tol)?;
            Ok(BuiltArtifact::Pair(PairArtifact::from_gtom(&result)))
        }
        Config::Chain(cfg) => {
            let povm = build_chain(cfg, tol)?;
            Ok(BuiltArtifact::Chain(ChainArtifact::from_povm(&povm)))
        }
        Config::Solidstate(cfg) => {
            let result = partial_cnot_measurement(cfg)?;
            Ok(BuiltArtifact::SolidState(SolidStateArtifact::from_result(
                &result,
            )))
        }
    }
}

fn check_positive_operator(m: &Complex2x2, tol: f64) -> Result<()> {
    let deviation = m.hermiticity_defect();
    if deviation > tol {
        return Err(Error::NotHermitian { deviation });
    }
    let eig = m.hermitian_eigensystem(tol)?;
    let min_eigenvalue = eig.values[1];
    if min_eigenvalue < -tol {
        return Err(Error::NotPsd { min_eigenvalue });
    }
    Ok(())
}

fn check_unitary(m: &Complex2x2, label: &str, tol: f64) -> Result<()> {
    let defect = m.unitarity_defect();
    if defect > tol {
        return Err(Error::InvalidConfig(format!(
            "{label} is not unitary (defect {defect:.3e})"
        )));
    }
    Ok(())
}

fn check_completeness(operators: &[Complex2x2], tol: f64) -> Result<()> {
    let sum = operators
        .iter()
        .fold(Complex2x2::zero(), |acc, m| acc + m.adjoint() * *m);
    let deviation = sum.max_abs_diff(&Complex2x2::identity());
    if deviation > tol {
        return Err(Error::IncompleteSet { deviation });
    }
    Ok(())
}

fn check_range(name: &'static str, value: f64, lo: f64, hi: f64, range: &'static str) -> Result<()> {
    if !value.is_finite() || value < lo || value > hi {
        return Err(Error::OutOfRange { name, value, range });
    }
    Ok(())
}

/// The first operator a pair artifact's scalars imply: `weight_plus` on the
/// dominant direction, `weight_minus` on its complement, eigenbasis pinned
/// by `theta` and the full overlap phase.
fn first_operator_from_scalars(
    weight_plus: f64,
    weight_minus: f64,
    theta: f64,
    w: [f64; 2],
) -> Complex2x2 {
    let alpha = if f64::hypot(w[0], w[1]) < 1e-12 {
        0.0
    } else {
        f64::atan2(w[1], w[0])
    };
    let (m_plus, m_minus) = basis_from_half_phase(theta, alpha);
    Complex2x2::outer(m_plus, m_plus).scale(weight_plus)
        + Complex2x2::outer(m_minus, m_minus).scale(weight_minus)
}

fn validate_pair(pair: &PairArtifact, tol: f64) -> Result<()> {
    check_positive_operator(&pair.m1, tol)?;
    check_positive_operator(&pair.m2, tol)?;
    check_unitary(&pair.v1, "correction V1", tol)?;
    check_unitary(&pair.v2, "correction V2", tol)?;
    check_completeness(&[pair.m1, pair.m2], tol)?;
    check_range("epsilon", pair.epsilon, 0.0, 1.0, "[0, 1]")?;
    check_range("theta", pair.theta, 0.0, std::f64::consts::PI, "[0, pi]")?;
    check_range(
        "phi",
        pair.phi,
        -std::f64::consts::PI,
        std::f64::consts::PI,
        "(-pi, pi]",
    )?;
    let w_norm = f64::hypot(pair.w[0], pair.w[1]);
    if w_norm > 1.0 + tol {
        return Err(Error::OutOfRange {
            name: "w",
            value: w_norm,
            range: "|w| <= 1",
        });
    }
    let folded = crate::qubit::fold_angle(2.0 * f64::atan2(pair.w[1], pair.w[0]));
    if w_norm > 1e-9 && (folded - pair.phi).abs() > 1e-6 {
        return Err(Error::InvalidConfig(format!(
            "phi {} does not match the overlap phase (expected {folded})",
            pair.phi
        )));
    }

    let unbalanced = [pair.p, pair.q, pair.delta];
    let (weight_plus, weight_minus) = if unbalanced.iter().all(Option::is_none) {
        (
            (0.5 * (1.0 + pair.epsilon)).sqrt(),
            (0.5 * (1.0 - pair.epsilon)).max(0.0).sqrt(),
        )
    } else {
        let (p, q, delta) = match (pair.p, pair.q, pair.delta) {
            (Some(p), Some(q), Some(delta)) => (p, q, delta),
            _ => {
                return Err(Error::InvalidConfig(
                    "p, q, and delta must be present together".into(),
                ))
            }
        };
        check_range("p", p, 0.0, 1.0, "[0, 1]")?;
        check_range("q", q, 0.0, 1.0, "[0, 1]")?;
        if (delta - (p + q - 1.0)).abs() > tol {
            return Err(Error::InvalidConfig(format!(
                "delta {delta} is not p + q - 1 = {}",
                p + q - 1.0
            )));
        }
        let trace = (pair.m1.adjoint() * pair.m1).trace().re;
        if (trace - (1.0 + delta)).abs() > tol {
            return Err(Error::InvalidConfig(format!(
                "first-effect trace {trace} is not 1 + delta = {}",
                1.0 + delta
            )));
        }
        if let Some(gate) = &pair.s_gate {
            check_unitary(gate, "compensation gate", tol)?;
        }
        (p.sqrt(), q.sqrt())
    };

    let expected = first_operator_from_scalars(weight_plus, weight_minus, pair.theta, pair.w);
    let deviation = pair.m1.max_abs_diff(&expected);
    if deviation > tol {
        return Err(Error::InvalidConfig(format!(
            "stored strength and direction do not reproduce the first \
             operator (deviation {deviation:.3e})"
        )));
    }
    Ok(())
}

fn validate_chain(chain: &ChainArtifact, tol: f64) -> Result<()> {
    let n = chain.k_ops.len();
    if n < 2 || chain.y_ops.len() != n || chain.w_ops.len() != n {
        return Err(Error::InvalidConfig(
            "a cascade artifact needs parallel K, Y, W lists with at least \
             two outcomes"
            .into(),
        ));
    }
    if chain.y_ops[0].max_abs_diff(&Complex2x2::identity()) > tol {
        return Err(Error::InvalidConfig(
            "the first advance product must be the identity".into(),
        ));
    }
    for k in &chain.k_ops {
        check_positive_operator(k, tol)?;
    }
    for w in &chain.w_ops {
        check_unitary(w, "correction W", tol)?;
    }
    check_completeness(&chain.k_ops, tol)?;
    for l in 0..n {
        let effect = chain.k_ops[l].adjoint() * chain.k_ops[l];
        let before = chain.y_ops[l].adjoint() * chain.y_ops[l];
        let defect = if l + 1 < n {
            let after = chain.y_ops[l + 1].adjoint() * chain.y_ops[l + 1];
            (effect + after).max_abs_diff(&before)
        } else {
            effect.max_abs_diff(&before)
        };
        if defect > tol {
            return Err(Error::InvalidConfig(format!(
                "stage {l} violates probability conservation by {defect:.3e}"
            )));
        }
    }
    Ok(())
}

fn validate_solid_state(ss: &SolidStateArtifact, tol: f64) -> Result<()> {
    check_positive_operator(&ss.m1, tol)?;
    check_positive_operator(&ss.m2, tol)?;
    check_unitary(&ss.v1, "correction V1", tol)?;
    check_unitary(&ss.v2, "correction V2", tol)?;
    check_completeness(&[ss.m1, ss.m2], tol)?;
    check_range("alphaPrime", ss.alpha_prime, 0.0, 1.0, "[0, 1]")?;
    for (label, m) in [("M1", &ss.m1), ("M2", &ss.m2)] {
        let off = m.at(0, 1).norm().max(m.at(1, 0).norm());
        if off > tol {
            return Err(Error::InvalidConfig(format!(
                "{label} must be diagonal in the measured basis \
                 (off-diagonal {off:.3e})"
            )));
        }
    }
    if (ss.m2.at(1, 1).re - ss.alpha_prime).abs() > tol {
        return Err(Error::InvalidConfig(format!(
            "alphaPrime {} does not match the readout-1 operator",
            ss.alpha_prime
        )));
    }
    Ok(())
}

/// Re-check every structural invariant of a built artifact. Building and
/// validating with the same tolerance always succeeds; the checks exist to
/// catch hand-edited or corrupted files.
pub fn validate_artifact(artifact: &BuiltArtifact, tol: f64) -> Result<()> {
    match artifact {
        BuiltArtifact::Pair(pair) => validate_pair(pair, tol),
        BuiltArtifact::Chain(chain) => validate_chain(chain, tol),
        BuiltArtifact::SolidState(ss) => validate_solid_state(ss, tol),
    }
}
