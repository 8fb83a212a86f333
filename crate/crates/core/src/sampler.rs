//! Monte Carlo simulation of any measurement built in this crate: outcome
//! probabilities, post-measurement states, and run-by-run statistics for
//! cascaded measurements, with an explicit, seedable, stream-splittable
//! random number generator for bit-reproducible runs.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::MultiOutcomePovm;
use crate::error::{Error, Result};
use crate::mat2::{vec_norm, Complex2x2};
use crate::qubit::PolarizationState;

/// Completeness slack accepted before sampling from an operator set.
const COMPLETENESS_TOL: f64 = 1e-8;

/// Named, seedable, splittable generator choice. Parallel shot batches must
/// use distinct `stream` values (stream id = batch index); runs with the same
/// spec are byte-reproducible.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct RngSpec {
    pub algorithm: String,
    pub seed: u64,
    pub stream: u64,
}

impl Default for RngSpec {
    fn default() -> Self {
        Self {
            algorithm: "chacha8".into(),
            seed: 0,
            stream: 0,
        }
    }
}

impl RngSpec {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    /// Instantiate the generator, rejecting unknown algorithm names.
    pub fn build(&self) -> Result<ChaCha8Rng> {
        if self.algorithm != "chacha8" {
            return Err(Error::InvalidConfig(format!(
                "unsupported rng algorithm '{}'; expected \"chacha8\"",
                self.algorithm
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        Ok(rng)
    }
}

/// One sampled (or enumerated) outcome of a flat operator set.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OutcomeRecord {
    pub outcome_index: usize,
    pub probability: f64,
    /// `None` marks a zero-probability branch, where no conditional state
    /// exists. The stored state carries the crate-wide canonical global
    /// phase, not the raw phase of the collapsed branch.
    pub post_state: Option<PolarizationState>,
}

/// One simulated run through a measurement cascade.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ChainRunRecord {
    pub outcome_index: usize,
    /// Number of two-outcome stages actually executed before the run ended.
    pub measurements_performed: usize,
    pub post_state: Option<PolarizationState>,
}

fn check_completeness(operators: &[Complex2x2]) -> Result<()> {
    let sum = operators
        .iter()
        .fold(Complex2x2::zero(), |acc, m| acc + m.adjoint() * *m);
    let deviation = sum.max_abs_diff(&Complex2x2::identity());
    if deviation > COMPLETENESS_TOL {
        return Err(Error::IncompleteSet { deviation });
    }
    Ok(())
}

/// Outcome probabilities `p_n = |M_n psi|^2` of a complete operator set.
pub fn born_probabilities(
    state: &PolarizationState,
    operators: &[Complex2x2],
) -> Result<Vec<f64>> {
    check_completeness(operators)?;
    let psi = state.coefficients();
    Ok(operators
        .iter()
        .map(|m| {
            let norm = vec_norm(m.apply(psi));
            norm * norm
        })
        .collect())
}

fn collapse(branch: [Complex64; 2]) -> Option<PolarizationState> {
    PolarizationState::from_vector(branch).ok()
}

/// Every outcome of the set with its probability and conditional state.
pub fn outcome_records(
    state: &PolarizationState,
    operators: &[Complex2x2],
) -> Result<Vec<OutcomeRecord>> {
    let probabilities = born_probabilities(state, operators)?;
    let psi = state.coefficients();
    Ok(operators
        .iter()
        .zip(probabilities)
        .enumerate()
        .map(|(outcome_index, (m, probability))| OutcomeRecord {
            outcome_index,
            probability,
            post_state: collapse(m.apply(psi)),
        })
        .collect())
}

/// Draw one outcome from the Born distribution of the set. Same generator
/// state in, same record out.
pub fn sample_outcome(
    state: &PolarizationState,
    operators: &[Complex2x2],
    rng: &mut ChaCha8Rng,
) -> Result<OutcomeRecord> {
    let probabilities = born_probabilities(state, operators)?;
    let draw: f64 = rng.random();
    let mut cumulative = 0.0;
    let mut chosen = None;
    for (index, p) in probabilities.iter().enumerate() {
        cumulative += p;
        if draw < cumulative {
            chosen = Some(index);
            break;
        }
    }
    // Guard against the cumulative sum landing a rounding error below the
    // draw: fall back to the last outcome that can actually occur.
    let outcome_index = match chosen {
        Some(index) => index,
        None => probabilities
            .iter()
            .rposition(|p| *p > 0.0)
            .expect("a complete set has at least one reachable outcome"),
    };
    let psi = state.coefficients();
    Ok(OutcomeRecord {
        outcome_index,
        probability: probabilities[outcome_index],
        post_state: collapse(operators[outcome_index].apply(psi)),
    })
}

/// Simulate one run through the cascade stage by stage: at each stage the
/// click branch terminates the run (the recorded correction unitary is then
/// applied, so the composite operation equals the outcome operator `K_l`),
/// and the advance branch hands the renormalized conditional state to the
/// next stage. Surviving every stage yields the terminal outcome without a
/// further measurement.
pub fn run_chain(
    state: &PolarizationState,
    povm: &MultiOutcomePovm,
    rng: &mut ChaCha8Rng,
) -> Result<ChainRunRecord> {
    let deviation = povm.completeness_defect();
    if deviation > COMPLETENESS_TOL {
        return Err(Error::IncompleteSet { deviation });
    }
    let n_stages = povm.stage_pairs.len();
    let mut psi = state.coefficients();
    for (l, pair) in povm.stage_pairs.iter().enumerate() {
        let clicked = pair.click.apply(psi);
        let click_norm = vec_norm(clicked);
        let draw: f64 = rng.random();
        if draw < click_norm * click_norm {
            let post = povm.w_ops[l].apply(clicked);
            return Ok(ChainRunRecord {
                outcome_index: l,
                measurements_performed: l + 1,
                post_state: collapse(post),
            });
        }
        let advanced = pair.advance.apply(psi);
        let norm = vec_norm(advanced);
        psi = [advanced[0] / norm, advanced[1] / norm];
    }
    let post = povm.w_ops[n_stages].apply(psi);
    Ok(ChainRunRecord {
        outcome_index: n_stages,
        measurements_performed: n_stages,
        post_state: collapse(post),
    })
}

/// Pearson chi-square statistic of observed counts against a model
/// distribution. Bins the model forbids contribute infinity when observed,
/// zero otherwise.
pub fn chi_square_statistic(observed: &[u64], probabilities: &[f64]) -> f64 {
    assert_eq!(
        observed.len(),
        probabilities.len(),
        "count and probability vectors must be parallel"
    );
    let total: u64 = observed.iter().sum();
    let total = total as f64;
    let mut statistic = 0.0;
    for (count, p) in observed.iter().zip(probabilities) {
        let expected = total * p;
        if expected > 0.0 {
            let residual = *count as f64 - expected;
            statistic += residual * residual / expected;
        } else if *count > 0 {
            return f64::INFINITY;
        }
    }
    statistic
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gtom::{build_gtom, partial_collapse};
    use crate::inverse::uniform_equal_weight_chain;
    use crate::sastom::sastom_from_strength;
    use crate::chain::build_chain;
    use crate::mat2::vec_inner;

    fn projective_set() -> Vec<Complex2x2> {
        vec![
            Complex2x2::from_real(1.0, 0.0, 0.0, 0.0),
            Complex2x2::from_real(0.0, 0.0, 0.0, 1.0),
        ]
    }

    #[test]
    fn born_weights_on_reference_sets() {
        let h = PolarizationState::horizontal();
        let p = born_probabilities(&h, &projective_set()).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-14 && p[1].abs() < 1e-14);

        let pair = sastom_from_strength(0.6, 0.0, 0.0).unwrap();
        let p = born_probabilities(&h, &[pair.m1, pair.m2]).unwrap();
        assert!((p[0] - 0.8).abs() < 1e-12);
        assert!((p[1] - 0.2).abs() < 1e-12);

        let flat = sastom_from_strength(0.0, 0.0, 0.0).unwrap();
        for state in [
            PolarizationState::diagonal(),
            PolarizationState::right_circular(),
        ] {
            let p = born_probabilities(&state, &[flat.m1, flat.m2]).unwrap();
            assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
            assert!((p[0] + p[1] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn incomplete_sets_are_rejected() {
        let mut set = projective_set();
        set[1] = set[1].scale(0.5);
        let err = born_probabilities(&PolarizationState::horizontal(), &set).unwrap_err();
        assert!(matches!(err, Error::IncompleteSet { .. }));
        let mut rng = RngSpec::default().build().unwrap();
        assert!(sample_outcome(&PolarizationState::horizontal(), &set, &mut rng).is_err());
    }

    #[test]
    fn certain_outcomes_always_fire_and_collapse_cleanly() {
        let h = PolarizationState::horizontal();
        let mut rng = RngSpec::with_seed(42).build().unwrap();
        for _ in 0..50 {
            let record = sample_outcome(&h, &projective_set(), &mut rng).unwrap();
            assert_eq!(record.outcome_index, 0);
            assert!((record.probability - 1.0).abs() < 1e-14);
            let post = record.post_state.unwrap();
            assert!(post.inner(&h).norm() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn zero_probability_branches_are_null() {
        let records =
            outcome_records(&PolarizationState::horizontal(), &projective_set()).unwrap();
        assert!(records[0].post_state.is_some());
        assert!(records[1].post_state.is_none());
        assert_eq!(records[1].probability, 0.0);
    }

    #[test]
    fn identical_seeds_reproduce_identical_runs() {
        let pair = sastom_from_strength(0.4, 1.0, 0.7).unwrap();
        let set = [pair.m1, pair.m2];
        let state = PolarizationState::diagonal();
        let spec = RngSpec::with_seed(42);
        let run = |spec: &RngSpec| {
            let mut rng = spec.build().unwrap();
            (0..200)
                .map(|_| sample_outcome(&state, &set, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        let first = run(&spec);
        let second = run(&spec);
        for (a, b) in first.iter().zip(&second) {
            assert_eq!(a.outcome_index, b.outcome_index);
            assert_eq!(a.probability.to_bits(), b.probability.to_bits());
            let (pa, pb) = (a.post_state.unwrap(), b.post_state.unwrap());
            for (ca, cb) in pa.coefficients().iter().zip(pb.coefficients()) {
                assert_eq!(ca.re.to_bits(), cb.re.to_bits());
                assert_eq!(ca.im.to_bits(), cb.im.to_bits());
            }
        }
        let mut other_stream = RngSpec {
            stream: 1,
            ..spec.clone()
        }
        .build()
        .unwrap();
        let outcomes: Vec<usize> = (0..200)
            .map(|_| {
                sample_outcome(&state, &set, &mut other_stream)
                    .unwrap()
                    .outcome_index
            })
            .collect();
        assert_ne!(
            outcomes,
            first.iter().map(|r| r.outcome_index).collect::<Vec<_>>(),
            "independent streams should decorrelate"
        );
    }

    #[test]
    fn empirical_frequency_sits_in_the_three_sigma_band() {
        let pair = sastom_from_strength(0.6, 0.0, 0.0).unwrap();
        let set = [pair.m1, pair.m2];
        let h = PolarizationState::horizontal();
        let mut rng = RngSpec::with_seed(7).build().unwrap();
        let shots = 100_000;
        let mut zeros = 0u64;
        for _ in 0..shots {
            if sample_outcome(&h, &set, &mut rng).unwrap().outcome_index == 0 {
                zeros += 1;
            }
        }
        let frequency = zeros as f64 / shots as f64;
        assert!(
            (0.796..=0.804).contains(&frequency),
            "frequency {frequency} outside the band"
        );
    }

    #[test]
    fn sampled_posteriors_follow_the_collapse_rule() {
        let config = partial_collapse(0.25, 1.2, -0.8).unwrap();
        let result = build_gtom(&config, 1e-10).unwrap();
        let set = [result.m1, result.m2];
        let state = PolarizationState::left_circular();
        let mut rng = RngSpec::with_seed(3).build().unwrap();
        for _ in 0..100 {
            let record = sample_outcome(&state, &set, &mut rng).unwrap();
            let branch = set[record.outcome_index].apply(state.coefficients());
            let norm = vec_norm(branch);
            assert!((record.probability - norm * norm).abs() < 1e-12);
            let post = record.post_state.unwrap().coefficients();
            let overlap = vec_inner(post, [branch[0] / norm, branch[1] / norm]);
            // Physical equivalence: the stored state fixes the global phase
            // canonically, so only the overlap magnitude is constrained.
            assert!((overlap.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_stage_runs_always_perform_one_measurement() {
        let chain = uniform_equal_weight_chain(2).unwrap();
        let povm = build_chain(&chain, 1e-10).unwrap();
        let mut rng = RngSpec::with_seed(11).build().unwrap();
        for _ in 0..50 {
            let record = run_chain(&PolarizationState::diagonal(), &povm, &mut rng).unwrap();
            assert_eq!(record.measurements_performed, 1);
            assert!(record.outcome_index < 2);
        }
    }

    #[test]
    fn chain_runs_apply_exactly_the_outcome_operator() {
        let chain = uniform_equal_weight_chain(4).unwrap();
        let povm = build_chain(&chain, 1e-10).unwrap();
        let state = PolarizationState::right_circular();
        let mut rng = RngSpec::with_seed(19).build().unwrap();
        let n = povm.n_outcomes();
        for _ in 0..300 {
            let record = run_chain(&state, &povm, &mut rng).unwrap();
            let k = record.outcome_index;
            assert_eq!(record.measurements_performed, (k + 1).min(n - 1));
            let direct = povm.k_ops[k].apply(state.coefficients());
            let norm = vec_norm(direct);
            let post = record.post_state.unwrap().coefficients();
            let overlap = vec_inner(post, [direct[0] / norm, direct[1] / norm]);
            assert!(
                (overlap.norm() - 1.0).abs() < 1e-10,
                "stagewise collapse must equal the composite operator"
            );
        }
    }

    #[test]
    fn stagewise_and_direct_sampling_agree_statistically() {
        let chain = uniform_equal_weight_chain(4).unwrap();
        let povm = build_chain(&chain, 1e-10).unwrap();
        let state = PolarizationState::horizontal();
        let exact = born_probabilities(&state, &povm.k_ops).unwrap();
        for p in &exact {
            assert!((p - 0.25).abs() < 1e-10);
        }

        let shots = 100_000;
        let mut stage_counts = vec![0u64; 4];
        let mut direct_counts = vec![0u64; 4];
        let mut measurements_total = 0usize;
        let mut rng_a = RngSpec::with_seed(5).build().unwrap();
        let mut rng_b = RngSpec {
            stream: 1,
            ..RngSpec::with_seed(5)
        }
        .build()
        .unwrap();
        for _ in 0..shots {
            let run = run_chain(&state, &povm, &mut rng_a).unwrap();
            stage_counts[run.outcome_index] += 1;
            measurements_total += run.measurements_performed;
            let direct = sample_outcome(&state, &povm.k_ops, &mut rng_b).unwrap();
            direct_counts[direct.outcome_index] += 1;
        }

        // 0.001-significance threshold for three degrees of freedom.
        let critical = 16.2662;
        assert!(chi_square_statistic(&stage_counts, &exact) < critical);
        assert!(chi_square_statistic(&direct_counts, &exact) < critical);

        // Exact expectation: (1 + 2 + 3 + 3)/4 stages, sigma from the exact
        // second moment.
        let mean = measurements_total as f64 / shots as f64;
        let sigma = (0.6875f64 / shots as f64).sqrt();
        assert!(
            (mean - 2.25).abs() < 3.0 * sigma,
            "mean stage count {mean} too far from 2.25"
        );
    }

    #[test]
    fn chi_square_statistic_reference_values() {
        assert_eq!(chi_square_statistic(&[25, 75], &[0.25, 0.75]), 0.0);
        let skewed = chi_square_statistic(&[52, 48], &[0.5, 0.5]);
        assert!((skewed - 0.16).abs() < 1e-12);
        assert!(chi_square_statistic(&[1, 99], &[0.0, 1.0]).is_infinite());
        assert_eq!(chi_square_statistic(&[0, 100], &[0.0, 1.0]), 0.0);
    }

    #[test]
    fn rng_spec_wire_format_and_validation() {
        let spec = RngSpec::default();
        assert_eq!(spec.algorithm, "chacha8");
        assert_eq!((spec.seed, spec.stream), (0, 0));
        let parsed: RngSpec = serde_json::from_str(r#"{"seed":9}"#).unwrap();
        assert_eq!(parsed.seed, 9);
        assert_eq!(parsed.algorithm, "chacha8");
        let json = serde_json::to_string(&parsed).unwrap();
        let back: RngSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, back);
        let bad = RngSpec {
            algorithm: "mt19937".into(),
            ..RngSpec::default()
        };
        assert!(matches!(bad.build(), Err(Error::InvalidConfig(_))));
    }
}
