//! Monte Carlo estimate of how often the private bag stays within EMD `Δ`
//! of its input, compared with closed-form lower bounds.

use std::f64::consts::E;

use serde::Serialize;

use super::stats::{wilson_interval, Z_ONE_SIDED_99};
use crate::emd::{emd_equal, VecBag};
use crate::error::{Error, Result};
use crate::laplace::{ln_scaled_truncated_exp_sum, PrivacyParams, RngState};
use crate::mechanism::private_bag;
use crate::vecspace::MetricKind;

/// `1 - exp(-εNΔ)·e_{n-1}(εNΔ)`, the utility lower bound stated for
/// `εNΔ ≤ n/e`. Evaluated in log space.
pub fn theorem_utility_bound(p: &PrivacyParams, bag_size: usize, delta: f64) -> f64 {
    let alpha = p.epsilon() * bag_size as f64 * delta;
    1.0 - ln_scaled_truncated_exp_sum(p.dim() - 1, alpha).exp()
}

/// `P[Gamma(N·n, 1/ε) ≤ NΔ] = 1 - exp(-εNΔ)·e_{Nn-1}(εNΔ)`.
///
/// The identity matching gives `E(b, K*(b)) ≤ (1/N)·Σ‖noise_i‖`, and the
/// sum of `N` independent `Gamma(n, 1/ε)` radii is `Gamma(Nn, 1/ε)`, so
/// this is a valid lower bound for every bag. It is attained when all
/// elements of the bag coincide.
pub fn sound_utility_bound(p: &PrivacyParams, bag_size: usize, delta: f64) -> f64 {
    let alpha = p.epsilon() * bag_size as f64 * delta;
    1.0 - ln_scaled_truncated_exp_sum(bag_size * p.dim() - 1, alpha).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UtilityReport {
    pub dim: usize,
    pub bag_size: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// `εNΔ`.
    pub scaled_radius: f64,
    pub precondition_holds: bool,
    pub trials: usize,
    pub successes: usize,
    pub empirical: f64,
    /// One-sided 99% Wilson lower bound on the success probability.
    pub lower_confidence: f64,
    /// One-sided 99% Wilson upper bound on the success probability.
    pub upper_confidence: f64,
    pub theorem_bound: f64,
    pub sound_bound: f64,
    /// `lower_confidence ≥ theorem_bound`.
    pub theorem_pass: bool,
    /// `upper_confidence ≥ sound_bound`: the data do not refute the sound bound.
    pub sound_pass: bool,
}

/// Runs `trials` draws of the private bag and counts `E(b, K*(b)) ≤ Δ`,
/// without checking the `εNΔ ≤ n/e` precondition.
pub fn utility_bound_estimate(
    bag: &VecBag,
    p: &PrivacyParams,
    delta: f64,
    trials: usize,
    rng: &mut RngState,
) -> Result<UtilityReport> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive (got {delta})")));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let n_bag = bag.size();
    let mut successes = 0;
    for _ in 0..trials {
        let noisy = private_bag(bag, p, rng)?;
        let (distance, _) = emd_equal(bag, &noisy, MetricKind::Euclidean)?;
        if distance <= delta {
            successes += 1;
        }
    }
    let (lower_confidence, _) = wilson_interval(successes as u64, trials as u64, Z_ONE_SIDED_99);
    let (_, upper_confidence) = wilson_interval(successes as u64, trials as u64, Z_ONE_SIDED_99);
    let scaled_radius = p.epsilon() * n_bag as f64 * delta;
    let theorem_bound = theorem_utility_bound(p, n_bag, delta);
    let sound_bound = sound_utility_bound(p, n_bag, delta);
    Ok(UtilityReport {
        dim: p.dim(),
        bag_size: n_bag,
        epsilon: p.epsilon(),
        delta,
        scaled_radius,
        precondition_holds: scaled_radius <= p.dim() as f64 / E,
        trials,
        successes,
        empirical: successes as f64 / trials as f64,
        lower_confidence,
        upper_confidence,
        theorem_bound,
        sound_bound,
        theorem_pass: lower_confidence >= theorem_bound,
        sound_pass: upper_confidence >= sound_bound,
    })
}

/// [`utility_bound_estimate`] restricted to the regime `εNΔ ≤ n/e` where
/// the stated bound is claimed to apply.
pub fn utility_bound_test(
    bag: &VecBag,
    p: &PrivacyParams,
    delta: f64,
    trials: usize,
    rng: &mut RngState,
) -> Result<UtilityReport> {
    let scaled = p.epsilon() * bag.size() as f64 * delta;
    let limit = p.dim() as f64 / E;
    if scaled > limit {
        return Err(Error::UtilityPrecondition { scaled, limit });
    }
    utility_bound_estimate(bag, p, delta, trials, rng)
}
