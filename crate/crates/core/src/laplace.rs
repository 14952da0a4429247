//! The n-dimensional Laplacian with density proportional to `exp(-ε‖v‖)`.
//!
//! Sampling uses the polar decomposition: a radius drawn from
//! `Gamma(n, 1/ε)` times a direction drawn uniformly from the unit sphere.
//! The radial distribution function has the closed form
//!
//! ```text
//! L(R) = 1 - exp(-εR) · e_{n-1}(εR),    e_k(α) = Σ_{i=0..k} α^i / i!
//! ```
//!
//! which is the CDF of `Gamma(n, 1/ε)`. Every quantity involving
//! factorials or sphere areas is evaluated in log space so `n` in the
//! hundreds (word2vec dimensions) does not overflow.

use std::f64::consts::PI;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::vecspace::Vector;

/// Privacy scale `ε` (per unit of Euclidean distance) and dimension `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    epsilon: f64,
    dim: usize,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, dim: usize) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be a positive finite number (got {epsilon})"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        Ok(Self { epsilon, dim })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Seeded ChaCha20 generator. The seed is kept so runs can be echoed and
/// replayed; the stream is bit-identical for identical seeds.
#[derive(Clone, Debug)]
pub struct RngState {
    seed: u64,
    inner: ChaCha20Rng,
}

impl RngState {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream `index` of the generator keyed by `seed`.
    ///
    /// Used to give each bag element its own generator, so per-element
    /// work produces the same values however it is scheduled.
    pub fn stream(seed: u64, index: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(index);
        Self { seed, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl RngCore for RngState {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// `ln S_{n-1}(1)`, the log surface area of the unit sphere in `R^n`.
pub fn ln_unit_sphere_area(dim: usize) -> f64 {
    let n = dim as f64;
    n.ln() + 0.5 * n * PI.ln() - ln_gamma(1.0 + 0.5 * n)
}

/// Density of the uniform distribution on the unit sphere in `R^n`,
/// i.e. `1 / S_{n-1}(1) = Γ(n/2) / (2 π^{n/2})`. The sampler never evaluates it.
pub fn uniform_sphere_density(dim: usize) -> f64 {
    (-ln_unit_sphere_area(dim)).exp()
}

pub fn ln_normalizing_constant(p: &PrivacyParams) -> f64 {
    let n = p.dim as f64;
    n * p.epsilon.ln() - ln_gamma(n) - ln_unit_sphere_area(p.dim)
}

/// `c_n^ε = ε^n / ((n-1)! · S_{n-1}(1))`.
///
/// Underflows to zero for very large `n` at small `ε`; use
/// [`ln_normalizing_constant`] there.
pub fn normalizing_constant(p: &PrivacyParams) -> f64 {
    ln_normalizing_constant(p).exp()
}

fn check_dim(v: &Vector, p: &PrivacyParams) -> Result<()> {
    if v.dim() != p.dim {
        return Err(Error::DimensionMismatch {
            expected: p.dim,
            actual: v.dim(),
        });
    }
    Ok(())
}

pub fn ln_laplacian_pdf(v: &Vector, p: &PrivacyParams) -> Result<f64> {
    check_dim(v, p)?;
    Ok(ln_normalizing_constant(p) - p.epsilon * v.norm())
}

/// `Lap(n, ε)(v) = c_n^ε · exp(-ε‖v‖)`.
pub fn laplacian_pdf(v: &Vector, p: &PrivacyParams) -> Result<f64> {
    ln_laplacian_pdf(v, p).map(f64::exp)
}

/// `e_k(α) = Σ_{i=0..=k} α^i / i!`, the first `k + 1` terms of `exp(α)`.
pub fn truncated_exp_sum(k: usize, alpha: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for i in 1..=k {
        term *= alpha / i as f64;
        sum += term;
    }
    sum
}

/// `ln(exp(-α) · e_k(α))` for `α ≥ 0`, summed in log space.
///
/// This is the log of the Poisson(α) CDF at `k`, and stays finite where
/// `e_k(α)` itself would overflow.
pub fn ln_scaled_truncated_exp_sum(k: usize, alpha: f64) -> f64 {
    assert!(alpha >= 0.0, "alpha must be nonnegative");
    if alpha == 0.0 {
        return 0.0;
    }
    let ln_alpha = alpha.ln();
    let ln_terms: Vec<f64> = (0..=k)
        .map(|i| -alpha + i as f64 * ln_alpha - ln_gamma(i as f64 + 1.0))
        .collect();
    let max = ln_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + ln_terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Probability that a `Lap(n, ε)` draw lies within distance `radius` of the origin.
pub fn radial_cdf(radius: f64, p: &PrivacyParams) -> f64 {
    assert!(radius >= 0.0, "radius must be nonnegative");
    if radius == 0.0 {
        return 0.0;
    }
    let tail = ln_scaled_truncated_exp_sum(p.dim - 1, p.epsilon * radius).exp();
    (1.0 - tail).clamp(0.0, 1.0)
}

/// Gamma variate with integer shape, as a sum of `shape` exponentials of mean `scale`.
pub fn gamma_sample<R: RngCore + ?Sized>(shape: usize, scale: f64, rng: &mut R) -> f64 {
    assert!(shape >= 1, "gamma shape must be a positive integer");
    assert!(scale > 0.0, "gamma scale must be positive");
    let total: f64 = (0..shape).map(|_| Distribution::<f64>::sample(&Exp1, &mut *rng)).sum();
    total * scale
}

/// Direction drawn uniformly from the unit sphere in `R^dim`, by
/// normalizing a standard Gaussian vector.
pub fn unit_sphere_sample<R: RngCore + ?Sized>(dim: usize, rng: &mut R) -> Vector {
    assert!(dim >= 1, "dimension must be positive");
    loop {
        let g: Vec<f64> = (0..dim)
            .map(|_| Distribution::<f64>::sample(&StandardNormal, &mut *rng))
            .collect();
        let norm = g.iter().map(|c| c * c).sum::<f64>().sqrt();
        // All-zero (or denormal) Gaussian draws have probability zero; redraw.
        if norm >= f64::MIN_POSITIVE {
            return Vector::from_raw_unchecked(g.into_iter().map(|c| c / norm).collect());
        }
    }
}

/// A draw from `Lap(n, ε)` centred at the origin.
pub fn laplacian_noise<R: RngCore + ?Sized>(p: &PrivacyParams, rng: &mut R) -> Vector {
    let radius = gamma_sample(p.dim, 1.0 / p.epsilon, rng);
    let direction = unit_sphere_sample(p.dim, rng);
    Vector::from_raw_unchecked(direction.into_inner().into_iter().map(|u| radius * u).collect())
}

/// `x + r·u` with `r ~ Gamma(n, 1/ε)` and `u` uniform on the unit sphere.
/// The output density at `z` is `Lap(n, ε)(z - x)`.
pub fn noisy_vector<R: RngCore + ?Sized>(x: &Vector, p: &PrivacyParams, rng: &mut R) -> Result<Vector> {
    check_dim(x, p)?;
    let noise = laplacian_noise(p, rng);
    x.add_scaled(1.0, &noise)
}
