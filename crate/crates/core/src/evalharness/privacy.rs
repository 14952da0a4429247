//! Privacy checks: the analytic density-ratio bound, the exact 1-D word
//! transition probabilities, the sampler's radial KS test, and the
//! empirical word-level ratio test.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use super::stats::{ks_test, wilson_interval, KsReport, Z_TWO_SIDED_99};
use crate::embeddings::EmbeddingStore;
use crate::error::{Error, Result};
use crate::laplace::{laplacian_noise, ln_laplacian_pdf, radial_cdf, PrivacyParams, RngState};
use crate::mechanism::{obfuscate_document_with_rng, Bag, PipelineConfig};
use crate::vecspace::{dist_vec, euclidean, MetricKind, Vector, Word};

/// Trial count below which the empirical ratio test warns that its
/// sampling slack is too wide to be informative.
pub const MIN_MEANINGFUL_TRIALS: usize = 10_000;

/// Vocabulary limit for the empirical ratio test outside one dimension.
pub const MAX_ENUMERABLE_VOCAB: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityRatioReport {
    pub dim: usize,
    pub epsilon: f64,
    pub triples: usize,
    pub violations: usize,
    /// Largest `ln ratio - ε‖x - y‖` seen; never above zero when the bound holds.
    pub worst_excess: f64,
    pub pass: bool,
}

/// Checks `Lap(z - x) / Lap(z - y) ≤ exp(ε‖x - y‖)` (plus `1e-9`) on
/// random triples drawn from a box of half-width `spread`.
pub fn density_ratio_test(p: &PrivacyParams, triples: usize, spread: f64, rng: &mut RngState) -> DensityRatioReport {
    let n = p.dim();
    let draw = |rng: &mut RngState| {
        Vector::new((0..n).map(|_| rng.random_range(-spread..spread)).collect()).expect("finite draw")
    };
    let mut violations = 0;
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..triples {
        let (x, y, z) = (draw(rng), draw(rng), draw(rng));
        let ln_num = ln_laplacian_pdf(&z.sub(&x).expect("same dim"), p).expect("dim");
        let ln_den = ln_laplacian_pdf(&z.sub(&y).expect("same dim"), p).expect("dim");
        let ln_bound = p.epsilon() * euclidean(&x, &y).expect("same dim");
        let ratio = (ln_num - ln_den).exp();
        if ratio > ln_bound.exp() + 1e-9 {
            violations += 1;
        }
        worst_excess = worst_excess.max(ln_num - ln_den - ln_bound);
    }
    DensityRatioReport {
        dim: n,
        epsilon: p.epsilon(),
        triples,
        violations,
        worst_excess,
        pass: violations == 0,
    }
}

/// KS test of sampled noise radii `‖Lap(n, ε)‖` against the closed-form radial CDF.
pub fn radius_ks_test(p: &PrivacyParams, samples: usize, significance: f64, rng: &mut RngState) -> KsReport {
    let radii: Vec<f64> = (0..samples).map(|_| laplacian_noise(p, rng).norm()).collect();
    ks_test(radii, |r| radial_cdf(r.max(0.0), p), significance)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionReport {
    pub dim: usize,
    pub samples: usize,
    pub coordinate_variances: Vec<f64>,
    pub mean_norm: f64,
    pub pass: bool,
}

/// Uniformity of the noise direction: each coordinate of the normalized
/// noise should have variance `1/n` and the mean direction should vanish.
pub fn direction_uniformity_test(p: &PrivacyParams, samples: usize, rng: &mut RngState) -> DirectionReport {
    let n = p.dim();
    let mut sum = vec![0.0; n];
    let mut sum_sq = vec![0.0; n];
    for _ in 0..samples {
        let v = laplacian_noise(p, rng);
        let norm = v.norm();
        for (i, c) in v.as_slice().iter().enumerate() {
            let u = c / norm;
            sum[i] += u;
            sum_sq[i] += u * u;
        }
    }
    let m = samples as f64;
    let means: Vec<f64> = sum.iter().map(|s| s / m).collect();
    let coordinate_variances: Vec<f64> = sum_sq.iter().zip(&means).map(|(sq, mu)| sq / m - mu * mu).collect();
    let mean_norm = means.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = 1.0 / n as f64;
    let pass = coordinate_variances.iter().all(|v| (v - target).abs() <= 0.01) && mean_norm <= 0.01;
    DirectionReport {
        dim: n,
        samples,
        coordinate_variances,
        mean_norm,
        pass,
    }
}

/// `P[lo < X ≤ hi]` for a 1-D Laplace variable centred at `centre` with
/// rate `ε`. Each case subtracts only tail terms, so masses far from the
/// centre keep full relative precision instead of cancelling to zero.
fn laplace_cell_mass_1d(lo: f64, hi: f64, centre: f64, epsilon: f64) -> f64 {
    let tail = |gap: f64| 0.5 * (-epsilon * gap).exp();
    if centre <= lo {
        tail(lo - centre) - tail(hi - centre)
    } else if centre >= hi {
        tail(centre - hi) - tail(centre - lo)
    } else {
        1.0 - tail(centre - lo) - tail(hi - centre)
    }
}

/// Exact word-to-word transition probabilities of the document mechanism
/// on a one-dimensional store.
///
/// Entry `[i][j]` is the probability that input word `i` (store order) is
/// released as word `j`: the 1-D Laplacian mass, centred at `Vec(i)`, of the
/// Voronoi cell of `Vec(j)`. Words sharing a position give the whole cell
/// to the earliest one, matching nearest-word tie-breaking.
pub fn exact_transitions_1d(store: &EmbeddingStore, epsilon: f64) -> Result<Vec<Vec<f64>>> {
    if store.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            actual: store.dim(),
        });
    }
    let positions: Vec<f64> = store.entries().map(|(_, v)| v.as_slice()[0]).collect();
    // Distinct positions, each owned by its earliest word.
    let mut owners: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for (i, &x) in positions.iter().enumerate() {
        let key = ordered_key(x);
        owners.entry(key).or_insert((x, i));
    }
    let cells: Vec<(f64, usize)> = owners.into_values().collect();
    let bounds: Vec<(f64, f64)> = (0..cells.len())
        .map(|k| {
            let lo = if k == 0 {
                f64::NEG_INFINITY
            } else {
                0.5 * (cells[k - 1].0 + cells[k].0)
            };
            let hi = if k + 1 == cells.len() {
                f64::INFINITY
            } else {
                0.5 * (cells[k].0 + cells[k + 1].0)
            };
            (lo, hi)
        })
        .collect();

    Ok(positions
        .iter()
        .map(|&centre| {
            let mut row = vec![0.0; positions.len()];
            for (&(_, owner), &(lo, hi)) in cells.iter().zip(&bounds) {
                row[owner] = laplace_cell_mass_1d(lo, hi, centre, epsilon);
            }
            row
        })
        .collect())
}

/// Total order key for finite floats (sign-magnitude to lexicographic).
fn ordered_key(x: f64) -> u64 {
    let bits = x.to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | (1 << 63)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactRatioCheck {
    /// `P(w1 → w')` for every word `w'` in store order.
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub max_abs_log_ratio: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrivacyRatioReport {
    pub w1: Word,
    pub w2: Word,
    pub epsilon: f64,
    pub distance: f64,
    /// `ε · dist_vec(w1, w2)`.
    pub log_bound: f64,
    pub trials: usize,
    /// Largest `|ln(P̂1/P̂2)|` over output words seen under both inputs.
    pub max_abs_log_ratio: f64,
    /// Whether every output word's 99% Wilson intervals are consistent with the bound.
    pub empirical_pass: bool,
    pub exact: Option<ExactRatioCheck>,
    pub warnings: Vec<String>,
    pub pass: bool,
}

/// Estimates the output-word distributions for the singleton documents
/// `{w1}` and `{w2}` and compares their log-ratio with `ε·d(w1, w2)`.
///
/// On a 1-D store the exact cell probabilities are checked too (slack `1e-6`).
pub fn privacy_ratio_test(
    store: &EmbeddingStore,
    w1: &Word,
    w2: &Word,
    cfg: &PipelineConfig,
    trials: usize,
) -> Result<PrivacyRatioReport> {
    cfg.validate()?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    if store.dim() != 1 && store.len() > MAX_ENUMERABLE_VOCAB {
        return Err(Error::InvalidParameter(format!(
            "empirical ratio test needs a vocabulary of at most {MAX_ENUMERABLE_VOCAB} words or dimension 1 (got {} words, dim {})",
            store.len(),
            store.dim()
        )));
    }
    let distance = dist_vec(w1, w2, store, MetricKind::Euclidean)?;
    let log_bound = cfg.epsilon * distance;

    let histogram = |w: &Word, stream: u64| -> Result<Vec<u64>> {
        let doc = Bag::from_tokens([w.clone()]);
        let mut rng = RngState::stream(cfg.seed, stream);
        let mut counts = vec![0u64; store.len()];
        for _ in 0..trials {
            let out = obfuscate_document_with_rng(&doc, store, cfg, &mut rng)?;
            let word = out.bag.tokens().next().expect("singleton output");
            counts[store.position(word).expect("output is a vocabulary word")] += 1;
        }
        Ok(counts)
    };
    let c1 = histogram(w1, 0)?;
    let c2 = histogram(w2, 1)?;

    let t = trials as u64;
    let mut max_abs_log_ratio: f64 = 0.0;
    let mut empirical_pass = true;
    for (&a, &b) in c1.iter().zip(&c2) {
        if a > 0 && b > 0 {
            max_abs_log_ratio = max_abs_log_ratio.max((a as f64 / b as f64).ln().abs());
        }
        let (lo1, hi1) = wilson_interval(a, t, Z_TWO_SIDED_99);
        let (lo2, hi2) = wilson_interval(b, t, Z_TWO_SIDED_99);
        // The smallest ratio consistent with the data must not exceed the bound.
        if lo1 > 0.0 && (lo1 / hi2).ln() > log_bound + 1e-12 {
            empirical_pass = false;
        }
        if lo2 > 0.0 && (lo2 / hi1).ln() > log_bound + 1e-12 {
            empirical_pass = false;
        }
    }

    let mut warnings = Vec::new();
    if trials < MIN_MEANINGFUL_TRIALS {
        warnings.push(format!(
            "only {trials} trials; at least {MIN_MEANINGFUL_TRIALS} are needed for a meaningful sampling slack"
        ));
    }

    let exact = if store.dim() == 1 {
        let table = exact_transitions_1d(store, cfg.epsilon)?;
        let i1 = store.position(w1).expect("checked by dist_vec");
        let i2 = store.position(w2).expect("checked by dist_vec");
        let (p1, p2) = (table[i1].clone(), table[i2].clone());
        let factor = log_bound.exp();
        let pass = p1
            .iter()
            .zip(&p2)
            .all(|(a, b)| *a <= factor * b + 1e-6 && *b <= factor * a + 1e-6);
        let max_abs_log_ratio = p1
            .iter()
            .zip(&p2)
            .filter(|(a, b)| **a > 0.0 && **b > 0.0)
            .map(|(a, b)| (a / b).ln().abs())
            .fold(0.0, f64::max);
        Some(ExactRatioCheck {
            p1,
            p2,
            max_abs_log_ratio,
            pass,
        })
    } else {
        None
    };

    let pass = empirical_pass && exact.as_ref().is_none_or(|e| e.pass);
    Ok(PrivacyRatioReport {
        w1: w1.clone(),
        w2: w2.clone(),
        epsilon: cfg.epsilon,
        distance,
        log_bound,
        trials,
        max_abs_log_ratio,
        empirical_pass,
        exact,
        warnings,
        pass,
    })
}
