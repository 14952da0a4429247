//! Small statistical helpers: Wilson score intervals and the one-sample
//! Kolmogorov–Smirnov test.

use serde::Serialize;

/// Two-sided 99% normal quantile.
pub const Z_TWO_SIDED_99: f64 = 2.575_829_303_548_900_4;
/// One-sided 99% normal quantile.
pub const Z_ONE_SIDED_99: f64 = 2.326_347_874_040_840_8;

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials > 0, "Wilson interval needs at least one trial");
    assert!(successes <= trials);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KsReport {
    pub samples: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub significance: f64,
    pub pass: bool,
}

/// Kolmogorov distribution survival function `Q(λ) = 2 Σ (-1)^{k-1} exp(-2k²λ²)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// `sup |F_n(x) - F(x)|` for the empirical CDF of `samples` against `cdf`.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// One-sample KS test with the Stephens small-sample correction of the
/// asymptotic p-value.
pub fn ks_test(mut samples: Vec<f64>, cdf: impl Fn(f64) -> f64, significance: f64) -> KsReport {
    assert!(!samples.is_empty());
    let d = ks_statistic(&mut samples, cdf);
    let sqrt_n = (samples.len() as f64).sqrt();
    let p_value = kolmogorov_survival((sqrt_n + 0.12 + 0.11 / sqrt_n) * d);
    KsReport {
        samples: samples.len(),
        statistic: d,
        p_value,
        significance,
        pass: p_value >= significance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_known_values() {
        // 50/100 at z = 1.96: classic textbook interval (0.4038, 0.5962).
        let (lo, hi) = wilson_interval(50, 100, 1.959_963_984_540_054);
        assert!((lo - 0.403_831).abs() < 1e-5, "{lo}");
        assert!((hi - 0.596_169).abs() < 1e-5, "{hi}");
        let (lo, hi) = wilson_interval(0, 10, Z_TWO_SIDED_99);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.5);
        let (lo, hi) = wilson_interval(10, 10, Z_TWO_SIDED_99);
        assert!(lo > 0.5);
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn kolmogorov_critical_values() {
        // Asymptotic critical values: Q(1.3581) = 0.05, Q(1.6276) = 0.01.
        assert!((kolmogorov_survival(1.358_1) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_survival(1.627_6) - 0.01).abs() < 1e-4);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
        assert!(kolmogorov_survival(5.0) < 1e-20);
    }

    #[test]
    fn ks_accepts_uniform_and_rejects_shifted() {
        let samples: Vec<f64> = (0..10_000).map(|i| (i as f64 + 0.5) / 10_000.0).collect();
        let uniform = |x: f64| x.clamp(0.0, 1.0);
        let r = ks_test(samples.clone(), uniform, 0.01);
        assert!(r.pass && r.statistic < 1e-3);
        let shifted: Vec<f64> = samples.iter().map(|x| x * 0.9).collect();
        assert!(!ks_test(shifted, uniform, 0.01).pass);
    }
}
