//! Cascades of two-outcome measurements realizing an N-outcome measurement:
//! each stage either fires, terminating the run with its outcome, or hands
//! the conditional state to the next stage. With `C_l`/`A_l` the firing and
//! advancing branch operators of stage `l`, the bookkeeping is
//!
//! ```text
//! Y_1 = I,    Y_{l+1} = A_l Y_l,
//! K_l = W_l C_l Y_l   (l < N),    K_N = W_N Y_N,
//! ```
//!
//! where each unitary `W_l` is chosen by polar decomposition so that `K_l`
//! is positive semidefinite. The construction satisfies the per-stage
//! probability bookkeeping `K_l^H K_l + Y_{l+1}^H Y_{l+1} = Y_l^H Y_l` and
//! therefore sums to a complete measurement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gtom::{build_gtom, GtomConfig};
use crate::mat2::{hs_inner, Complex2x2};

/// One link of the cascade: an asymmetric two-outcome stage, an optional
/// frame rotation, and a flag selecting which branch terminates the run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainStage {
    pub gtom: GtomConfig,
    /// Unitary `R` conjugating both stage operators (`M -> R^H M R`); used to
    /// change the measured direction between stages without inserting extra
    /// factors into the cascade recursion.
    pub pre_rotation: Option<Complex2x2>,
    /// Fire on the second branch and advance on the first. This relabelling
    /// of the two output ports lets a stage whose firing effect has trace
    /// below one be expressed through the complementary configuration.
    pub swap_outcomes: bool,
}

impl ChainStage {
    pub fn new(gtom: GtomConfig) -> Self {
        Self {
            gtom,
            pre_rotation: None,
            swap_outcomes: false,
        }
    }

    pub fn with_rotation(gtom: GtomConfig, rotation: Complex2x2) -> Self {
        Self {
            gtom,
            pre_rotation: Some(rotation),
            swap_outcomes: false,
        }
    }

    pub fn swapped(gtom: GtomConfig) -> Self {
        Self {
            gtom,
            pre_rotation: None,
            swap_outcomes: true,
        }
    }
}

/// Ordered stage list describing an N-outcome cascade (N = stages + 1).
///
/// Wire format: `{"stages": [...], "preRotations": [matrix|null, ...],
/// "swapOutcomes": [bool, ...]}` with the two annotation arrays parallel to
/// `stages`; both may be omitted and default to no rotation / no swap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChainRepr", into = "ChainRepr")]
pub struct ChainConfig {
    pub stages: Vec<ChainStage>,
}

impl ChainConfig {
    pub fn new(stages: Vec<ChainStage>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidConfig(
                "a measurement chain needs at least one stage".into(),
            ));
        }
        Ok(Self { stages })
    }

    /// Number of outcomes: one per stage plus the terminal branch.
    pub fn n_outcomes(&self) -> usize {
        self.stages.len() + 1
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ChainRepr {
    stages: Vec<GtomConfig>,
    #[serde(default)]
    pre_rotations: Option<Vec<Option<Complex2x2>>>,
    #[serde(default)]
    swap_outcomes: Option<Vec<bool>>,
}

impl TryFrom<ChainRepr> for ChainConfig {
    type Error = Error;
    fn try_from(r: ChainRepr) -> Result<Self> {
        let n = r.stages.len();
        let rotations = r.pre_rotations.unwrap_or_else(|| vec![None; n]);
        let swaps = r.swap_outcomes.unwrap_or_else(|| vec![false; n]);
        if rotations.len() != n || swaps.len() != n {
            return Err(Error::InvalidConfig(format!(
                "stage annotations must parallel the {n} stages: \
                 got {} pre-rotations and {} swap flags",
                rotations.len(),
                swaps.len()
            )));
        }
        let stages = r
            .stages
            .into_iter()
            .zip(rotations)
            .zip(swaps)
            .map(|((gtom, pre_rotation), swap_outcomes)| ChainStage {
                gtom,
                pre_rotation,
                swap_outcomes,
            })
            .collect();
        Self::new(stages)
    }
}

impl From<ChainConfig> for ChainRepr {
    fn from(c: ChainConfig) -> Self {
        Self {
            stages: c.stages.iter().map(|s| s.gtom).collect(),
            pre_rotations: Some(c.stages.iter().map(|s| s.pre_rotation).collect()),
            swap_outcomes: Some(c.stages.iter().map(|s| s.swap_outcomes).collect()),
        }
    }
}

/// Effective operator pair of one stage after rotation and branch selection.
#[derive(Clone, Copy, Debug)]
pub struct StagePair {
    /// Branch that fires and terminates the run at this stage.
    pub click: Complex2x2,
    /// Branch that hands the conditional state to the next stage.
    pub advance: Complex2x2,
}

/// An N-outcome measurement built from a cascade of N-1 two-outcome stages.
#[derive(Clone, Debug)]
pub struct MultiOutcomePovm {
    /// Positive outcome operators `K_l`, one per outcome.
    pub k_ops: Vec<Complex2x2>,
    /// Accumulated advance products `Y_l` (`y_ops[0] = I`), one per outcome.
    pub y_ops: Vec<Complex2x2>,
    /// Unitaries `W_l` with `K_l = W_l C_l Y_l` (terminal: `K_N = W_N Y_N`).
    pub w_ops: Vec<Complex2x2>,
    /// The effective stage pairs the cascade was built from; needed to
    /// replay a run stage by stage.
    pub stage_pairs: Vec<StagePair>,
}

impl MultiOutcomePovm {
    pub fn n_outcomes(&self) -> usize {
        self.k_ops.len()
    }

    /// Effect operators `E_l = K_l^H K_l`.
    pub fn effects(&self) -> Vec<Complex2x2> {
        self.k_ops.iter().map(|k| k.adjoint() * *k).collect()
    }

    /// Largest entry of `sum_l E_l - I`.
    pub fn completeness_defect(&self) -> f64 {
        let sum = self
            .effects()
            .into_iter()
            .fold(Complex2x2::zero(), |acc, e| acc + e);
        sum.max_abs_diff(&Complex2x2::identity())
    }

    /// Largest violation of the per-stage probability bookkeeping
    /// `K_l^H K_l + Y_{l+1}^H Y_{l+1} = Y_l^H Y_l` (terminal outcome:
    /// `K_N^H K_N = Y_N^H Y_N`).
    pub fn conservation_defect(&self) -> f64 {
        let grams: Vec<Complex2x2> = self
            .y_ops
            .iter()
            .map(|y| y.adjoint() * *y)
            .collect();
        let n = self.k_ops.len();
        let mut worst: f64 = 0.0;
        for l in 0..n {
            let effect = self.k_ops[l].adjoint() * self.k_ops[l];
            let defect = if l + 1 < n {
                (effect + grams[l + 1]).max_abs_diff(&grams[l])
            } else {
                effect.max_abs_diff(&grams[l])
            };
            worst = worst.max(defect);
        }
        worst
    }
}

/// Build the cascade from explicit stage pairs. Each pair must satisfy
/// `C^H C + A^H A = I` within `tol`. Singular accumulated products are
/// handled by the deterministic polar completion, so downstream outcomes may
/// legitimately come out rank-deficient or zero.
pub fn build_chain_from_pairs(pairs: &[StagePair], tol: f64) -> Result<MultiOutcomePovm> {
    if pairs.is_empty() {
        return Err(Error::InvalidConfig(
            "a measurement chain needs at least one stage".into(),
        ));
    }
    for (l, pair) in pairs.iter().enumerate() {
        let sum = pair.click.adjoint() * pair.click + pair.advance.adjoint() * pair.advance;
        let defect = sum.max_abs_diff(&Complex2x2::identity());
        if defect > tol {
            return Err(Error::InvalidConfig(format!(
                "stage {l} pair is not a measurement: \
                 branch effects sum to identity only within {defect:.3e}"
            )));
        }
    }

    let mut y_ops = Vec::with_capacity(pairs.len() + 1);
    let mut k_ops = Vec::with_capacity(pairs.len() + 1);
    let mut w_ops = Vec::with_capacity(pairs.len() + 1);
    y_ops.push(Complex2x2::identity());
    for (l, pair) in pairs.iter().enumerate() {
        let y = y_ops[l];
        let polar = (pair.click * y).right_polar_decompose();
        k_ops.push(polar.positive);
        w_ops.push(polar.unitary);
        y_ops.push(pair.advance * y);
    }
    let terminal = y_ops[pairs.len()].right_polar_decompose();
    k_ops.push(terminal.positive);
    w_ops.push(terminal.unitary);

    Ok(MultiOutcomePovm {
        k_ops,
        y_ops,
        w_ops,
        stage_pairs: pairs.to_vec(),
    })
}

/// Build the cascade described by `cfg`: construct every stage, apply its
/// optional frame rotation and branch relabelling, then run the recursion.
pub fn build_chain(cfg: &ChainConfig, tol: f64) -> Result<MultiOutcomePovm> {
    if cfg.stages.is_empty() {
        return Err(Error::InvalidConfig(
            "a measurement chain needs at least one stage".into(),
        ));
    }
    let mut pairs = Vec::with_capacity(cfg.stages.len());
    for (l, stage) in cfg.stages.iter().enumerate() {
        let built = build_gtom(&stage.gtom, tol)?;
        let (mut click, mut advance) = if stage.swap_outcomes {
            (built.m2, built.m1)
        } else {
            (built.m1, built.m2)
        };
        if let Some(rotation) = &stage.pre_rotation {
            let defect = rotation.unitarity_defect();
            if defect > tol {
                return Err(Error::InvalidConfig(format!(
                    "stage {l} pre-rotation is not unitary (defect {defect:.3e})"
                )));
            }
            let rh = rotation.adjoint();
            click = rh * click * *rotation;
            advance = rh * advance * *rotation;
        }
        pairs.push(StagePair { click, advance });
    }
    build_chain_from_pairs(&pairs, tol)
}

/// Matrix of pairwise effect overlaps `Tr(E_l^H E_m)`; the off-diagonal
/// entries measure how distinguishable two outcomes are, and a design with
/// all off-diagonal entries equal treats every outcome pair alike.
pub fn povm_gram(povm: &MultiOutcomePovm) -> Vec<Vec<f64>> {
    let effects = povm.effects();
    effects
        .iter()
        .map(|a| effects.iter().map(|b| hs_inner(a, b).re).collect())
        .collect()
}
