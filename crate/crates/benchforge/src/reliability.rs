//! Noise-aware reliability test for model rankings.
//!
//! A benchmark with a fraction K of noisy items (items whose recorded label
//! is wrong or unanswerable, on which models score at a guess rate p) still
//! supports sound *rankings*: the expected clean accuracy is
//! `(observed - K*p) / (1 - K)`, and because the same K applies to both
//! models it cancels out of the significance statistic
//! `z = (a - b) * sqrt(N) / sqrt(a(1-a) + b(1-b))` computed on observed
//! accuracies. `confidence` is Phi(|z|); `p_value` its complement (the
//! one-sided tail). A Monte-Carlo simulator cross-checks the prediction.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, Distribution};

use crate::stats::normal_cdf;

#[derive(Debug, thiserror::Error)]
pub enum ReliabilityError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

/// Expected accuracy on the clean subset, given the observed accuracy, the
/// noise fraction `k`, and the guess rate `p` on noisy items.
pub fn denoise_accuracy(observed: f64, k: f64, p: f64) -> Result<f64, ReliabilityError> {
    check_unit("observed accuracy", observed)?;
    check_unit("guess rate p", p)?;
    if !k.is_finite() || !(0.0..1.0).contains(&k) {
        return Err(ReliabilityError::Domain(format!(
            "noise fraction k must lie in [0, 1), got {k}"
        )));
    }
    let clean = (observed - k * p) / (1.0 - k);
    if !(0.0..=1.0).contains(&clean) {
        return Err(ReliabilityError::Inconsistent(format!(
            "observed={observed}, k={k}, p={p} imply clean accuracy {clean} outside [0, 1]"
        )));
    }
    Ok(clean)
}

fn check_unit(what: &str, v: f64) -> Result<(), ReliabilityError> {
    if !v.is_finite() || !(0.0..=1.0).contains(&v) {
        return Err(ReliabilityError::Domain(format!(
            "{what} must lie in [0, 1], got {v}"
        )));
    }
    Ok(())
}

/// Inputs for a two-model ranking test on one benchmark of `n` items.
#[derive(Debug, Clone, Copy)]
pub struct RankTestInput {
    pub acc_a: f64,
    pub acc_b: f64,
    pub n: usize,
    /// Estimated noise fraction. Does not move the statistic (it cancels);
    /// it only feeds the optional denoised point estimates.
    pub k: f64,
    /// Guess rate on noisy items; when given, denoised accuracies are
    /// reported alongside the test.
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RankTestResult {
    /// Signed statistic; positive means model A observed ahead.
    pub z: f64,
    /// Phi(|z|): probability the observed order matches the true order.
    pub confidence: f64,
    /// 1 - Phi(|z|): one-sided tail against the observed order.
    pub p_value: f64,
    pub denoised_a: Option<f64>,
    pub denoised_b: Option<f64>,
}

/// Significance of the observed ranking between two models.
pub fn rank_test(input: &RankTestInput) -> Result<RankTestResult, ReliabilityError> {
    let RankTestInput { acc_a, acc_b, n, k, p } = *input;
    check_unit("accuracy a", acc_a)?;
    check_unit("accuracy b", acc_b)?;
    if n < 2 {
        return Err(ReliabilityError::Domain(format!(
            "need at least 2 items, got {n}"
        )));
    }
    if !k.is_finite() || !(0.0..1.0).contains(&k) {
        return Err(ReliabilityError::Domain(format!(
            "noise fraction k must lie in [0, 1), got {k}"
        )));
    }
    let variance = acc_a * (1.0 - acc_a) + acc_b * (1.0 - acc_b);
    if variance <= 0.0 {
        return Err(ReliabilityError::Degenerate(
            "both accuracies sit at 0 or 1, so the variance term vanishes".into(),
        ));
    }
    let z = (acc_a - acc_b) * (n as f64).sqrt() / variance.sqrt();
    let confidence = normal_cdf(z.abs()).expect("finite statistic");
    let (denoised_a, denoised_b) = match p {
        Some(p) => (
            Some(denoise_accuracy(acc_a, k, p)?),
            Some(denoise_accuracy(acc_b, k, p)?),
        ),
        None => (None, None),
    };
    Ok(RankTestResult {
        z,
        confidence,
        p_value: 1.0 - confidence,
        denoised_a,
        denoised_b,
    })
}

/// Parameters for the Monte-Carlo self-check. `p_a`/`p_b` are the guess
/// rates of each model on noisy items; the modeled assumption is that they
/// are equal, and the unequal form exists to probe sensitivity to it.
#[derive(Debug, Clone, Copy)]
pub struct SimulationParams {
    pub true_a: f64,
    pub true_b: f64,
    pub n: usize,
    pub k: f64,
    pub p_a: f64,
    pub p_b: f64,
    pub trials: u32,
    pub seed: u64,
}

impl SimulationParams {
    /// The standard setup: one shared guess rate.
    pub fn shared_guess_rate(
        true_a: f64,
        true_b: f64,
        n: usize,
        k: f64,
        p: f64,
        trials: u32,
        seed: u64,
    ) -> Self {
        Self {
            true_a,
            true_b,
            n,
            k,
            p_a: p,
            p_b: p,
            trials,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SimulationOutcome {
    /// Fraction of trials whose observed winner matched the true winner
    /// (ties count half).
    pub empirical_rank_accuracy: f64,
    /// Mean of the per-trial predicted confidence Phi(|z|).
    pub mean_predicted_confidence: f64,
    pub trials: u32,
}

/// Simulate noisy benchmarks and compare the rank test's predicted
/// confidence against the empirically observed rank accuracy.
///
/// Each trial answers `(1-k)*n` clean items at the true accuracies and the
/// remaining noisy items at the guess rates, then checks who appears ahead.
/// Per-trial RNG substreams make the outcome seed-deterministic regardless
/// of evaluation order.
pub fn validate_by_simulation(params: &SimulationParams) -> Result<SimulationOutcome, ReliabilityError> {
    let SimulationParams { true_a, true_b, n, k, p_a, p_b, trials, seed } = *params;
    check_unit("true accuracy a", true_a)?;
    check_unit("true accuracy b", true_b)?;
    check_unit("guess rate p_a", p_a)?;
    check_unit("guess rate p_b", p_b)?;
    if !k.is_finite() || !(0.0..1.0).contains(&k) {
        return Err(ReliabilityError::Domain(format!(
            "noise fraction k must lie in [0, 1), got {k}"
        )));
    }
    if n == 0 || trials == 0 {
        return Err(ReliabilityError::Domain(
            "need at least one item and one trial".into(),
        ));
    }

    let noisy = ((k * n as f64).round() as usize).min(n);
    let clean = n - noisy;
    let true_gap = true_a - true_b;

    let mut rank_score_sum = 0.0;
    let mut confidence_sum = 0.0;
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let correct_a = draw(clean, true_a, &mut rng) + draw(noisy, p_a, &mut rng);
        let correct_b = draw(clean, true_b, &mut rng) + draw(noisy, p_b, &mut rng);
        let a_hat = correct_a as f64 / n as f64;
        let b_hat = correct_b as f64 / n as f64;
        let observed_gap = a_hat - b_hat;

        rank_score_sum += if observed_gap == 0.0 || true_gap == 0.0 {
            0.5
        } else if observed_gap.signum() == true_gap.signum() {
            1.0
        } else {
            0.0
        };

        let variance = a_hat * (1.0 - a_hat) + b_hat * (1.0 - b_hat);
        confidence_sum += if variance <= 0.0 {
            // All-or-nothing draw: the order is reported with certainty
            // unless it is a tie.
            if observed_gap == 0.0 {
                0.5
            } else {
                1.0
            }
        } else {
            let z = observed_gap * (n as f64).sqrt() / variance.sqrt();
            normal_cdf(z.abs()).expect("finite statistic")
        };
    }

    Ok(SimulationOutcome {
        empirical_rank_accuracy: rank_score_sum / trials as f64,
        mean_predicted_confidence: confidence_sum / trials as f64,
        trials,
    })
}

fn trial_rng(seed: u64, trial: u32) -> ChaCha12Rng {
    // Distinct substream per trial so trials can run in any order.
    let mixed = seed.wrapping_add((trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    ChaCha12Rng::seed_from_u64(mixed)
}

fn draw(count: usize, p: f64, rng: &mut ChaCha12Rng) -> u64 {
    if count == 0 {
        return 0;
    }
    Binomial::new(count as u64, p)
        .expect("validated probability")
        .sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn denoise_worked_example() {
        // (0.6 - 0.2*0.25) / 0.8 = 0.6875.
        let got = denoise_accuracy(0.6, 0.2, 0.25).unwrap();
        assert!((got - 0.6875).abs() < 1e-12);
    }

    #[test]
    fn denoise_identity_without_noise() {
        for &a in &[0.0, 0.31, 0.5, 1.0] {
            assert_eq!(denoise_accuracy(a, 0.0, 0.5).unwrap(), a);
        }
    }

    #[test]
    fn denoise_domain_and_consistency_errors() {
        assert!(matches!(
            denoise_accuracy(0.6, 1.0, 0.25),
            Err(ReliabilityError::Domain(_))
        ));
        assert!(matches!(
            denoise_accuracy(0.6, -0.1, 0.25),
            Err(ReliabilityError::Domain(_))
        ));
        assert!(matches!(
            denoise_accuracy(1.2, 0.2, 0.25),
            Err(ReliabilityError::Domain(_))
        ));
        // Observed below what pure guessing on the noisy share implies.
        assert!(matches!(
            denoise_accuracy(0.1, 0.5, 0.9),
            Err(ReliabilityError::Inconsistent(_))
        ));
    }

    fn base_input() -> RankTestInput {
        RankTestInput {
            acc_a: 0.6,
            acc_b: 0.5,
            n: 100,
            k: 0.0,
            p: None,
        }
    }

    #[test]
    fn rank_test_worked_example() {
        // z = 0.1 * 10 / sqrt(0.24 + 0.25) = 10/7.
        let r = rank_test(&base_input()).unwrap();
        assert!((r.z - 10.0 / 7.0).abs() < 1e-12, "z = {}", r.z);
        assert!((r.confidence - 0.9234).abs() < 1e-4, "conf = {}", r.confidence);
        assert!((r.confidence + r.p_value - 1.0).abs() < 1e-12);
        assert!(r.denoised_a.is_none() && r.denoised_b.is_none());
    }

    #[test]
    fn z_sign_follows_order_and_swaps_antisymmetrically() {
        let fwd = rank_test(&base_input()).unwrap();
        let rev = rank_test(&RankTestInput {
            acc_a: 0.5,
            acc_b: 0.6,
            ..base_input()
        })
        .unwrap();
        assert!(fwd.z > 0.0 && rev.z < 0.0);
        assert!((fwd.z + rev.z).abs() < 1e-12);
        assert!((fwd.confidence - rev.confidence).abs() < 1e-12);
    }

    #[test]
    fn noise_fraction_never_moves_the_statistic() {
        let reference = rank_test(&base_input()).unwrap();
        for i in 0..=9 {
            let k = i as f64 / 10.0;
            let r = rank_test(&RankTestInput { k, ..base_input() }).unwrap();
            assert!(
                (r.z - reference.z).abs() < 1e-12,
                "k={k} moved z: {} vs {}",
                r.z,
                reference.z
            );
            assert!((r.confidence - reference.confidence).abs() < 1e-12);
        }
    }

    #[test]
    fn denoised_estimates_appear_with_guess_rate() {
        let r = rank_test(&RankTestInput {
            k: 0.2,
            p: Some(0.25),
            ..base_input()
        })
        .unwrap();
        assert!((r.denoised_a.unwrap() - 0.6875).abs() < 1e-12);
        assert!((r.denoised_b.unwrap() - 0.5625).abs() < 1e-12);
        // And the statistic still matches the k = 0 case.
        let plain = rank_test(&base_input()).unwrap();
        assert!((r.z - plain.z).abs() < 1e-12);
    }

    #[test]
    fn degenerate_accuracies_are_rejected() {
        let err = rank_test(&RankTestInput {
            acc_a: 1.0,
            acc_b: 0.0,
            ..base_input()
        })
        .unwrap_err();
        assert!(matches!(err, ReliabilityError::Degenerate(_)));
        assert!(matches!(
            rank_test(&RankTestInput { n: 1, ..base_input() }),
            Err(ReliabilityError::Domain(_))
        ));
    }

    #[test]
    fn simulation_is_seed_deterministic() {
        let params = SimulationParams::shared_guess_rate(0.65, 0.55, 200, 0.075, 0.25, 500, 11);
        let a = validate_by_simulation(&params).unwrap();
        let b = validate_by_simulation(&params).unwrap();
        assert_eq!(a.empirical_rank_accuracy, b.empirical_rank_accuracy);
        assert_eq!(a.mean_predicted_confidence, b.mean_predicted_confidence);
    }

    #[test]
    fn equal_true_accuracies_are_a_coin_flip() {
        let params = SimulationParams::shared_guess_rate(0.6, 0.6, 500, 0.075, 0.25, 10_000, 3);
        let out = validate_by_simulation(&params).unwrap();
        assert!(
            (out.empirical_rank_accuracy - 0.5).abs() < 0.02,
            "rank accuracy = {}",
            out.empirical_rank_accuracy
        );
    }

    #[test]
    fn predicted_confidence_tracks_empirical_rank_accuracy() {
        let params = SimulationParams::shared_guess_rate(0.65, 0.55, 500, 0.075, 0.25, 10_000, 7);
        let out = validate_by_simulation(&params).unwrap();
        assert!(
            (out.empirical_rank_accuracy - out.mean_predicted_confidence).abs() <= 0.03,
            "empirical {} vs predicted {}",
            out.empirical_rank_accuracy,
            out.mean_predicted_confidence
        );
    }

    #[test]
    fn wider_gaps_rank_more_reliably() {
        let narrow = validate_by_simulation(&SimulationParams::shared_guess_rate(
            0.58, 0.55, 300, 0.075, 0.25, 3_000, 5,
        ))
        .unwrap();
        let wide = validate_by_simulation(&SimulationParams::shared_guess_rate(
            0.75, 0.55, 300, 0.075, 0.25, 3_000, 5,
        ))
        .unwrap();
        assert!(wide.empirical_rank_accuracy > narrow.empirical_rank_accuracy);
        assert!(wide.mean_predicted_confidence > narrow.mean_predicted_confidence);
    }

    #[test]
    fn unequal_guess_rates_are_accepted_as_an_extension() {
        let params = SimulationParams {
            true_a: 0.65,
            true_b: 0.55,
            n: 500,
            k: 0.2,
            p_a: 0.4,
            p_b: 0.1,
            trials: 2_000,
            seed: 13,
        };
        // The asymmetric guess rates help model A here, so ranking gets easier,
        // not harder; the simulator just reports what happens.
        let out = validate_by_simulation(&params).unwrap();
        assert!(out.empirical_rank_accuracy > 0.9);
    }

    #[test]
    fn simulation_domain_errors() {
        let mut params = SimulationParams::shared_guess_rate(0.6, 0.5, 100, 0.0, 0.25, 10, 1);
        params.k = 1.0;
        assert!(matches!(
            validate_by_simulation(&params),
            Err(ReliabilityError::Domain(_))
        ));
        let zero_trials = SimulationParams {
            trials: 0,
            ..SimulationParams::shared_guess_rate(0.6, 0.5, 100, 0.0, 0.25, 10, 1)
        };
        assert!(matches!(
            validate_by_simulation(&zero_trials),
            Err(ReliabilityError::Domain(_))
        ));
    }
}
