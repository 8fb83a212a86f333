//! Inverse design: from target measurement characteristics to physical
//! parameters, and from a target list of positive outcome operators to a
//! measurement cascade.
//!
//! All parameter solvers here are closed-form. For the symmetric stage the
//! balance parameter and overlap follow from `u = e cos(theta)`; for the
//! asymmetric stage the pair `(G, E) = (2 r' t', sqrt(1 - e^2))` are the two
//! roots of `z^2 - 2 sqrt(pq) z + (p + q - 1) = 0`, which is solvable with
//! both roots nonnegative exactly when `p + q >= 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{ChainConfig, ChainStage};
use crate::error::{Error, Result};
use crate::gtom::{build_gtom, GtomConfig};
use crate::mat2::Complex2x2;
use crate::optics::{SastomConfig, UnitarySpec};
use crate::qubit::{pauli_x, pauli_y, pauli_z, projector_axis};
use crate::sastom::{characterize_sastom, overlap_modulus, validate_strength_direction};

/// Target strength and direction for a symmetric two-outcome measurement.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SastomTarget {
    pub epsilon: f64,
    pub theta: f64,
    pub phi: f64,
}

/// Target effect weights and direction for an asymmetric two-outcome
/// measurement: the first effect is `p |m+><m+| + q |m-><m-|`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GtomTarget {
    pub p: f64,
    pub q: f64,
    pub theta: f64,
    pub phi: f64,
}

/// Find an interferometer configuration realizing the target strength and
/// direction, in the gauge where the first arm unitary is the identity.
///
/// Closed form: `r = sqrt((1 + e cos(theta))/2)` and the arm overlap
/// `w = |w| e^{i phi/2}` with `|w| = e sin(theta) / sqrt(1 - e^2 cos^2
/// (theta))`; the second arm is the unitary `[[a, w], [-conj(w), a]]`,
/// `a = sqrt(1 - |w|^2)`.
pub fn solve_sastom_params(target: &SastomTarget) -> Result<SastomConfig> {
    validate_strength_direction(target.epsilon, target.theta, target.phi)?;
    let cfg = config_from_parts(target.epsilon, target.theta, 0.5 * target.phi)?;

    let check = characterize_sastom(&cfg, 1e-8)?;
    let residual = (check.epsilon - target.epsilon).abs();
    if residual > 1e-8 {
        return Err(Error::NoSolution {
            detail: format!(
                "strength solve verification failed for epsilon={}, theta={}, phi={}",
                target.epsilon, target.theta, target.phi
            ),
            residual,
        });
    }
    Ok(cfg)
}

/// Build the canonical identity-first-arm configuration for a strength,
/// polar angle and overlap *half*-phase. Working with the half-phase
/// directly (rather than a folded full phase) keeps the off-diagonal sign
/// of the direction projector intact for callers that extracted it from an
/// operator.
fn config_from_parts(epsilon: f64, theta: f64, half_phase: f64) -> Result<SastomConfig> {
    let u = epsilon * theta.cos();
    let r = (0.5 * (1.0 + u)).sqrt().min(1.0);
    let w = Complex64::from_polar(overlap_modulus(epsilon, theta), half_phase);
    // 1 - |w|^2 = (1 - e^2)/(1 - u^2) exactly; this form keeps the
    // projective limit e = 1 at an exactly rank-deficient branch operator
    // instead of leaking a sqrt-of-roundoff residue into the second arm.
    let a = if w.norm() == 0.0 {
        1.0
    } else {
        let denominator = ((1.0 - u) * (1.0 + u)).max(f64::MIN_POSITIVE);
        (((1.0 - epsilon) * (1.0 + epsilon)).max(0.0) / denominator)
            .sqrt()
            .min(1.0)
    };
    let u2 = Complex2x2::new(
        Complex64::new(a, 0.0),
        w,
        -w.conj(),
        Complex64::new(a, 0.0),
    );
    SastomConfig::new(r, UnitarySpec::identity(), UnitarySpec::from_matrix(u2))
}

/// Find a two-splitter configuration realizing target effect weights
/// `(p, q)` along `(theta, phi)`.
///
/// Feasible exactly when `p + q >= 1`. When two strength roots exist the
/// smaller strength is preferred; the degenerate smaller root (`e = 0`, which
/// cannot carry a direction) falls back to the larger one.
pub fn solve_gtom_params(target: &GtomTarget) -> Result<GtomConfig> {
    for (name, value) in [("p", target.p), ("q", target.q)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::OutOfRange {
                name,
                value,
                range: "[0, 1]",
            });
        }
    }
    let (p, q) = (target.p, target.q);
    let (epsilon, r_prime) = solve_weight_split(p, q)?;

    let sastom = solve_sastom_params(&SastomTarget {
        epsilon,
        theta: target.theta,
        phi: target.phi,
    })?;
    let cfg = GtomConfig::new(sastom, r_prime)?;

    let built = build_gtom(&cfg, 1e-8)?;
    let residual = (built.p - p).abs().max((built.q - q).abs());
    if residual > 1e-8 {
        return Err(Error::NoSolution {
            detail: format!("weight solve verification failed for p={p}, q={q}"),
            residual,
        });
    }
    Ok(cfg)
}

/// Solve the weight system for `(epsilon, r_prime)` given effect weights
/// `(p, q)`; feasible exactly when `p + q >= 1`.
fn solve_weight_split(p: f64, q: f64) -> Result<(f64, f64)> {
    let slack = 1.0 - (p + q);
    if slack > 1e-9 {
        return Err(Error::NoSolution {
            detail: format!(
                "no configuration reaches weights p={p}, q={q}: the effect traces \
                 require p + q >= 1 (the complementary outcome labels reach \
                 p'={}, q'={})",
                1.0 - p,
                1.0 - q
            ),
            residual: slack,
        });
    }

    // Roots of z^2 - 2 sqrt(pq) z + (p + q - 1): z_plus carries the
    // mixer-overlap product, z_minus the strength complement (or vice versa).
    let root_gap = ((1.0 - p) * (1.0 - q)).max(0.0).sqrt();
    let z_plus = ((p * q).max(0.0).sqrt() + root_gap).min(1.0);
    let z_minus = ((p * q).max(0.0).sqrt() - root_gap).clamp(0.0, 1.0);

    let eps_small = (1.0 - z_plus * z_plus).max(0.0).sqrt();
    let eps_big = (1.0 - z_minus * z_minus).max(0.0).sqrt();
    let (epsilon, g) = if eps_small > 1e-9 {
        (eps_small, z_minus)
    } else {
        (eps_big, z_plus)
    };

    // 2 r' t' = g; the branch of r' follows the ordering of the weights
    // (p >= q needs r' >= t').
    let half_gap = (1.0 - g * g).max(0.0).sqrt();
    let r_prime_sq = if p >= q {
        0.5 * (1.0 + half_gap)
    } else {
        0.5 * (1.0 - half_gap)
    };
    Ok((epsilon, r_prime_sq.max(0.0).sqrt().min(1.0)))
}

/// Recover a cascade configuration from a complete list of positive outcome
/// operators: stage `l` is read off as the positive factor of
/// `K_l Y_l^+`, the next advance operator as `sqrt(I - M1^H M1)`, and the
/// accumulated product `Y_l` is tracked alongside. Rebuilding the returned
/// configuration reproduces every target effect.
///
/// Targets must be positive semidefinite and sum (in effect) to the
/// identity within `1e-8`. When an accumulated product has already
/// destroyed a direction that a later target still needs, that ordering is
/// unrealizable and the stage index is reported; permuting the outcomes may
/// help.
pub fn decompose_povm_to_chain(targets: &[Complex2x2]) -> Result<ChainConfig> {
    const CHECK: f64 = 1e-8;
    if targets.len() < 2 {
        return Err(Error::InvalidConfig(
            "a cascade needs at least two outcome operators".into(),
        ));
    }
    let mut sum = Complex2x2::zero();
    for k in targets {
        let herm = k.hermiticity_defect();
        if herm > CHECK {
            return Err(Error::NotHermitian { deviation: herm });
        }
        let eig = k.hermitian_eigensystem(CHECK)?;
        if eig.values[1] < -CHECK {
            return Err(Error::NotPsd {
                min_eigenvalue: eig.values[1],
            });
        }
        sum = sum + k.adjoint() * *k;
    }
    let completeness = sum.max_abs_diff(&Complex2x2::identity());
    if completeness > CHECK {
        return Err(Error::IncompleteSet {
            deviation: completeness,
        });
    }

    let mut stages = Vec::with_capacity(targets.len() - 1);
    let mut y = Complex2x2::identity();
    for (index, k) in targets.iter().take(targets.len() - 1).enumerate() {
        let m1 = positive_factor_on_image(k, &y, index)?;
        let m2 = (Complex2x2::identity() - m1 * m1).psd_sqrt(CHECK)?;
        stages.push(stage_from_click(&m1)?);
        y = m2 * y;
    }
    let cfg = ChainConfig::new(stages)?;
    debug_assert!(
        match crate::chain::build_chain(&cfg, CHECK) {
            Ok(povm) => povm.k_ops.iter().zip(targets).all(|(k, t)| {
                (k.adjoint() * *k).max_abs_diff(&(t.adjoint() * *t)) < 1e-6
            }),
            Err(_) => false,
        },
        "rebuilt cascade disagrees with its targets"
    );
    Ok(cfg)
}

/// `|K Y^+|`: the positive stage operator recovered through the
/// pseudo-inverse of the accumulated advance product. Directions the
/// product has annihilated must also be annihilated by `K`.
fn positive_factor_on_image(k: &Complex2x2, y: &Complex2x2, stage: usize) -> Result<Complex2x2> {
    const KERNEL_CUTOFF: f64 = 1e-9;
    const CONSISTENCY: f64 = 1e-8;
    let polar = y.right_polar_decompose();
    let eig = polar.positive.hermitian_eigensystem(CONSISTENCY)?;
    let mut inverse_on_image = Complex2x2::zero();
    for (value, vector) in eig.values.iter().zip(eig.vectors.iter()) {
        if *value > KERNEL_CUTOFF {
            inverse_on_image =
                inverse_on_image + Complex2x2::outer(*vector, *vector).scale(1.0 / *value);
        } else {
            let leak = crate::mat2::vec_norm(k.apply(*vector));
            if leak > CONSISTENCY {
                return Err(Error::SingularStage { stage });
            }
        }
    }
    let x = *k * inverse_on_image * polar.unitary;
    Ok(x.right_polar_decompose().positive)
}

/// Express a positive firing operator as an asymmetric-stage configuration,
/// relabelling the output ports when its effect trace falls below one.
fn stage_from_click(m1: &Complex2x2) -> Result<ChainStage> {
    let effect = *m1 * *m1;
    let eig = effect.hermitian_eigensystem(1e-8)?;
    let p = eig.values[0].clamp(0.0, 1.0);
    let q = eig.values[1].clamp(0.0, 1.0);
    let projector = Complex2x2::outer(eig.vectors[0], eig.vectors[0]);
    let (theta, half_phase) = projector_axis(&projector)?;
    let swap = p + q - 1.0 < -1e-12;
    let (wp, wq) = if swap { (1.0 - p, 1.0 - q) } else { (p, q) };
    let (epsilon, r_prime) = solve_weight_split(wp, wq)?;
    let sastom = config_from_parts(epsilon, theta, half_phase)?;
    Ok(ChainStage {
        gtom: GtomConfig::new(sastom, r_prime)?,
        pre_rotation: None,
        swap_outcomes: swap,
    })
}

/// Cascade whose N outcomes all fire with probability 1/N on every input:
/// each stage claims an equal share of the remaining weight, so every
/// outcome operator is `I/sqrt(N)`. Early stages need the port relabelling
/// because their firing share is below one half.
pub fn uniform_equal_weight_chain(n_outcomes: usize) -> Result<ChainConfig> {
    if n_outcomes < 2 {
        return Err(Error::InvalidConfig(
            "an equal-weight cascade needs at least two outcomes".into(),
        ));
    }
    let mut stages = Vec::with_capacity(n_outcomes - 1);
    for stage in 0..n_outcomes - 1 {
        let share = 1.0 / (n_outcomes - stage) as f64;
        let swap = share < 0.5;
        let weight = if swap { 1.0 - share } else { share };
        let (epsilon, r_prime) = solve_weight_split(weight, weight)?;
        let sastom = config_from_parts(epsilon, std::f64::consts::FRAC_PI_2, 0.0)?;
        stages.push(ChainStage {
            gtom: GtomConfig::new(sastom, r_prime)?,
            pre_rotation: None,
            swap_outcomes: swap,
        });
    }
    ChainConfig::new(stages)
}

/// Four positive outcome operators of equal trace 1/2 whose effects point
/// along the vertices of a regular tetrahedron on the Bloch sphere:
/// `E_l = (I + bias * n_l . sigma)/4`. By symmetry every pair of distinct
/// effects has the same overlap `(1 - bias^2/3)/8`, so the design treats all
/// outcome pairs alike; `bias = 0` degenerates to four copies of `I/4`.
pub fn equal_trace_four_outcome(bias: f64) -> Result<Vec<Complex2x2>> {
    if !(0.0..=1.0).contains(&bias) {
        return Err(Error::OutOfRange {
            name: "bias",
            value: bias,
            range: "[0, 1]",
        });
    }
    let s = 1.0 / 3f64.sqrt();
    let axes = [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]];
    axes.iter()
        .map(|n| {
            let traceless = pauli_x().scale(n[0]) + pauli_y().scale(n[1]) + pauli_z().scale(n[2]);
            let effect = (Complex2x2::identity() + traceless.scale(bias)).scale(0.25);
            effect.psd_sqrt(1e-12)
        })
        .collect()
}
