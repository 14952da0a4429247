//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness so every line is
//! printed even when all criteria pass.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use emdp::emd::{emd_bruteforce, emd_equal, VecBag};
use emdp::evalharness::{
    density_ratio_test, direction_uniformity_test, exact_transitions_1d, median_table, radius_ks_test, sweep_epsilon,
    utility_bound_estimate, SweepConfig, SyntheticCorpusSpec,
};
use emdp::{dist_vec, EmbeddingStore, MetricKind, PrivacyParams, RngState, Vector, Word};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_bag(rng: &mut RngState, size: usize, dim: usize, scale: f64) -> VecBag {
    VecBag::from_rows((0..size).map(|_| (0..dim).map(|_| rng.random_range(-scale..scale)).collect::<Vec<_>>()))
        .expect("finite rows")
}

fn random_pairs(count: usize) -> Vec<(VecBag, VecBag)> {
    let mut rng = RngState::from_seed(0xE1);
    (0..count)
        .map(|_| {
            let n = rng.random_range(1..=6);
            let d = rng.random_range(1..=3);
            (random_bag(&mut rng, n, d, 5.0), random_bag(&mut rng, n, d, 5.0))
        })
        .collect()
}

fn emd_oracle() -> Outcome {
    let pairs = random_pairs(500);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (a, b) in &pairs {
        let (fast, _) = emd_equal(a, b, MetricKind::Euclidean).expect("equal sizes");
        let slow = emd_bruteforce(a, b, MetricKind::Euclidean).expect("small bags");
        worst = worst.max((fast - slow).abs());
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-9 && elapsed < Duration::from_secs(10),
        format!("500 pairs, max |Hungarian - brute force| = {worst:.2e}, {elapsed:.2?}"),
    )
}

fn permutation_plans() -> Outcome {
    let mut off = 0usize;
    let mut worst: f64 = 0.0;
    for (a, b) in random_pairs(500) {
        let (_, plan) = emd_equal(&a, &b, MetricKind::Euclidean).expect("equal sizes");
        let unit = 1.0 / a.size() as f64;
        for &f in plan.flows.iter().flatten() {
            let gap = f.abs().min((f - unit).abs());
            worst = worst.max(gap);
            if gap > 1e-9 {
                off += 1;
            }
        }
    }
    outcome(
        off == 0,
        format!("{off} entries outside {{0, 1/N}}, max gap {worst:.2e}"),
    )
}

fn laplacian_decomposition() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, (n, eps)) in [(1, 1.0), (2, 1.0), (4, 0.5), (8, 2.0)].into_iter().enumerate() {
        let p = PrivacyParams::new(eps, n).expect("valid");
        let r = radius_ks_test(&p, 100_000, 0.01, &mut RngState::stream(0xE3, i as u64));
        pass &= r.pass;
        parts.push(format!("KS(n={n},ε={eps}) p={:.3}", r.p_value));
    }
    let p = PrivacyParams::new(1.0, 3).expect("valid");
    let r = direction_uniformity_test(&p, 100_000, &mut RngState::stream(0xE3, 9));
    pass &= r.pass;
    let var_gap = r
        .coordinate_variances
        .iter()
        .map(|v| (v - 1.0 / 3.0).abs())
        .fold(0.0, f64::max);
    parts.push(format!(
        "direction |var - 1/3| ≤ {var_gap:.4}, |mean| = {:.4}",
        r.mean_norm
    ));
    outcome(pass, parts.join("; "))
}

fn density_ratio() -> Outcome {
    let mut violations = 0;
    let mut parts = Vec::new();
    for (i, n) in [1, 2, 8, 300].into_iter().enumerate() {
        let p = PrivacyParams::new(1.0, n).expect("valid");
        let r = density_ratio_test(&p, 10_000, 3.0, &mut RngState::stream(0xE4, i as u64));
        violations += r.violations;
        parts.push(format!("n={n}: {}", r.violations));
    }
    outcome(
        violations == 0,
        format!("violations per dimension ({})", parts.join(", ")),
    )
}

fn exact_word_privacy() -> Outcome {
    let store = EmbeddingStore::from_entries(
        [("north", 0.0), ("centre", 1.0), ("south", 3.0)]
            .into_iter()
            .map(|(w, x)| (Word::new(w).expect("word"), Vector::new(vec![x]).expect("vector")))
            .collect(),
    )
    .expect("store");
    let words = store.words().to_vec();
    let mut pass = true;
    let mut worst_sum: f64 = 0.0;
    let mut worst_excess = f64::NEG_INFINITY;
    for eps in [0.1, 0.5, 1.0, 2.0, 8.0] {
        let table = exact_transitions_1d(&store, eps).expect("1-D store");
        for row in &table {
            worst_sum = worst_sum.max((row.iter().sum::<f64>() - 1.0).abs());
        }
        for (i, wi) in words.iter().enumerate() {
            for (k, wk) in words.iter().enumerate() {
                let d = dist_vec(wi, wk, &store, MetricKind::Euclidean).expect("in vocabulary");
                for (p, q) in table[i].iter().zip(&table[k]) {
                    let excess = p - (eps * d).exp() * q;
                    worst_excess = worst_excess.max(excess);
                    pass &= excess <= 1e-6;
                }
            }
        }
    }
    pass &= worst_sum <= 1e-9;
    outcome(
        pass,
        format!("max P(w→w') - e^(εd)·P(v→w') = {worst_excess:.2e}, max |row sum - 1| = {worst_sum:.2e}"),
    )
}

fn utility_bound() -> Outcome {
    let p = PrivacyParams::new(1.0, 8).expect("valid");
    let bag = random_bag(&mut RngState::from_seed(0xE6), 4, 8, 1.0);
    let start = Instant::now();
    let mut passes = 0;
    let mut last = None;
    for seed in 0..20 {
        let r = utility_bound_estimate(&bag, &p, 2.0, 10_000, &mut RngState::stream(0xE6, seed)).expect("valid input");
        passes += usize::from(r.theorem_pass);
        last = Some(r);
    }
    let elapsed = start.elapsed();
    let r = last.expect("20 runs");
    outcome(
        passes >= 19 && elapsed < Duration::from_secs(60),
        format!(
            "{passes}/20 runs with lower bound ≥ {:.4}; last run {}/{} successes, one-sided 99% lower bound {:.4}; \
             sound bound {:.3e}; {elapsed:.2?}",
            r.theorem_bound, r.successes, r.trials, r.lower_confidence, r.sound_bound
        ),
    )
}

fn table_trend() -> Outcome {
    let tables: Vec<_> = (0..5u64)
        .map(|s| {
            let cfg = SweepConfig {
                seed: 2000 + s,
                ..SweepConfig::default()
            };
            sweep_epsilon(&SyntheticCorpusSpec::desk_scale(1000 + s), &[8.0, 4.0, 2.0, 1.0], &cfg).expect("sweep")
        })
        .collect();
    let medians = median_table(&tables).expect("equal layouts");
    let sr_auth: Vec<f64> = medians.iter().map(|(_, m)| m[0]).collect();
    let sr_topic: Vec<f64> = medians.iter().map(|(_, m)| m[1]).collect();
    let chance = tables[0].snippets as f64 / tables[0].authors as f64;
    let monotone = sr_auth.windows(2).all(|w| w[1] <= w[0]);
    let near_chance = *sr_auth.last().expect("rows") <= 2.0 * chance;
    let topic_kept = sr_topic[1] >= 0.8 * sr_topic[0];
    outcome(
        monotone && near_chance && topic_kept,
        format!(
            "median SRauth over (none, 8, 4, 2, 1) = {sr_auth:?}, 2× chance = {}; median SRtopic none = {}, ε=8 = {}",
            2.0 * chance,
            sr_topic[0],
            sr_topic[1]
        ),
    )
}

fn run_cli(args: &[&str], dir: &Path) -> (Option<i32>, Vec<u8>) {
    let out = dir.join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_emdp"))
        .args(args)
        .arg("--output")
        .arg(&out)
        .current_dir(dir)
        .output()
        .expect("binary runs")
        .status;
    let bytes = std::fs::read(&out).unwrap_or_default();
    (status.code(), bytes)
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let p = dir.path();
    std::fs::write(
        p.join("vec.txt"),
        "4 2\npresident 0 1\nchief 0 1.2\npress 3 0\nmedia 3 0.4\n",
    )
    .expect("write");
    std::fs::write(p.join("a.txt"), "The President greets the press.\n").expect("write");
    std::fs::write(p.join("b.txt"), "The chief speaks to the media!\n").expect("write");
    let runs: [(&str, &[&str]); 5] = [
        (
            "obfuscate",
            &[
                "obfuscate",
                "--embeddings",
                "vec.txt",
                "--epsilon",
                "1",
                "--seed",
                "7",
                "--input",
                "a.txt",
                "--input",
                "b.txt",
            ],
        ),
        (
            "emd",
            &[
                "emd",
                "--embeddings",
                "vec.txt",
                "--left",
                "a.txt",
                "--right",
                "b.txt",
                "--plan",
            ],
        ),
        (
            "sample",
            &["sample", "--n", "3", "--epsilon", "1", "--count", "1000", "--seed", "7"],
        ),
        (
            "verify",
            &["verify", "--seed", "7", "--samples", "20000", "--trials", "2000"],
        ),
        ("eval", &["eval", "--seed", "7", "--rounds", "20"]),
    ];
    let mut failed = Vec::new();
    for (name, args) in runs {
        let first = run_cli(args, p);
        let second = run_cli(args, p);
        if first.0 != Some(0) || first.1.is_empty() || first != second {
            failed.push(format!("{name} (exit {:?})", first.0));
        }
    }
    outcome(
        failed.is_empty(),
        if failed.is_empty() {
            "obfuscate, emd, sample, verify, eval byte-identical across repeated runs".to_string()
        } else {
            format!("not reproducible or failed: {}", failed.join(", "))
        },
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("EMD matches brute force", emd_oracle),
        ("optimal plans are permutation matrices", permutation_plans),
        ("Laplacian radius and direction", laplacian_decomposition),
        ("density ratio bound", density_ratio),
        ("exact word-level privacy", exact_word_privacy),
        ("utility lower bound", utility_bound),
        ("inference trend under obfuscation", table_trend),
        ("CLI determinism", cli_determinism),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let o = run();
        failures += usize::from(!o.pass);
        println!(
            "criterion {} {}: {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
