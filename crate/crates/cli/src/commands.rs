use std::path::Path;
use std::process::ExitCode;

use emdp::evalharness::{
    density_ratio_test, direction_uniformity_test, privacy_ratio_test, radius_ks_test, sweep_epsilon,
    utility_bound_estimate, SweepConfig, SyntheticCorpusSpec,
};
use emdp::laplace::laplacian_noise;
use emdp::mechanism::load_stopwords;
use emdp::{
    emd_equal, emd_general, load_embeddings, obfuscate_document_with_rng, preprocess, Bag, EmbeddingStore, LoadOptions,
    MetricKind, ObfuscationReport, PipelineConfig, PrivacyParams, RngState, VecBag, Vector, Word,
};
use rand::RngCore;
use serde::Serialize;
use serde_json::json;

use crate::output::{csv_preamble, emit, read_text, resolve_seed, to_json, CliError, CliResult};
use crate::{EmdArgs, EvalArgs, ObfuscateArgs, SampleArgs, VerifyArgs, VocabArgs};

const KS_SIGNIFICANCE: f64 = 0.01;

fn load_vocab(v: &VocabArgs) -> CliResult<EmbeddingStore> {
    Ok(load_embeddings(
        &v.embeddings,
        LoadOptions {
            max_vocab: v.max_vocab,
            lowercase_vocab: false,
        },
    )?)
}

fn pipeline(v: &VocabArgs, epsilon: f64, seed: u64) -> CliResult<PipelineConfig> {
    let mut cfg = PipelineConfig::new(epsilon, seed);
    if let Some(path) = &v.stopwords {
        cfg.stopwords = load_stopwords(path)?;
    }
    cfg.truncate_to = v.truncate;
    cfg.validate()?;
    Ok(cfg)
}

fn read_bag(path: &Path, cfg: &PipelineConfig) -> CliResult<Bag> {
    preprocess(&read_text(path)?, cfg).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct DocumentReport<'a> {
    input: String,
    #[serde(flatten)]
    report: &'a ObfuscationReport,
}

pub fn obfuscate(a: ObfuscateArgs) -> CliResult<ExitCode> {
    let seed = resolve_seed(a.seed);
    // Validate the cheap parameters before reading a large vocabulary.
    let cfg = pipeline(&a.vocab, a.epsilon, seed)?;
    let store = load_vocab(&a.vocab)?;
    let mut documents = Vec::with_capacity(a.inputs.len());
    for (i, input) in a.inputs.iter().enumerate() {
        let bag = read_bag(input, &cfg)?;
        let report = obfuscate_document_with_rng(&bag, &store, &cfg, &mut RngState::stream(seed, i as u64))?;
        eprintln!(
            "{}: epsilon_bag = ε·N = {}·{} = {}",
            input.display(),
            report.epsilon,
            report.perturbed,
            report.epsilon_bag
        );
        documents.push(
            serde_json::to_value(DocumentReport {
                input: input.display().to_string(),
                report: &report,
            })
            .expect("report serializes"),
        );
    }
    let out = json!({
        "config": {
            "epsilon": a.epsilon,
            "seed": seed,
            "embeddings": a.vocab.embeddings.display().to_string(),
            "max_vocab": a.vocab.max_vocab,
            "truncate": a.vocab.truncate,
            "stopwords": a.vocab.stopwords.as_ref().map(|p| p.display().to_string()),
        },
        "documents": documents,
    });
    emit(a.output.as_deref(), &to_json(&out))?;
    Ok(ExitCode::SUCCESS)
}

pub fn emd(a: EmdArgs) -> CliResult<ExitCode> {
    // ε and the seed play no part in the distance; any valid value will do.
    let cfg = pipeline(&a.vocab, 1.0, 0)?;
    let store = load_vocab(&a.vocab)?;
    let embed = |path: &Path| -> CliResult<VecBag> {
        let (vectors, oov) = store
            .embed_bag(&read_bag(path, &cfg)?)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if !oov.is_empty() {
            eprintln!("{}: {} out-of-vocabulary token(s) ignored", path.display(), oov.size());
        }
        Ok(vectors)
    };
    let (left, right) = (embed(&a.left)?, embed(&a.right)?);
    let (distance, plan) = if a.general {
        emd_general(&left, &right, MetricKind::Euclidean)?
    } else {
        emd_equal(&left, &right, MetricKind::Euclidean)?
    };
    let text = if a.plan {
        to_json(&json!({ "emd": distance, "plan": plan }))
    } else {
        format!("{distance}\n")
    };
    emit(a.output.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

pub fn sample(a: SampleArgs) -> CliResult<ExitCode> {
    let p = PrivacyParams::new(a.epsilon, a.n)?;
    let seed = resolve_seed(a.seed);
    let mut rng = RngState::from_seed(seed);
    let mut text = csv_preamble(&[
        ("n", a.n.to_string()),
        ("epsilon", a.epsilon.to_string()),
        ("count", a.count.to_string()),
        ("seed", seed.to_string()),
    ]);
    let header: Vec<String> = (1..=a.n).map(|i| format!("x{i}")).collect();
    text.push_str(&header.join(","));
    text.push('\n');
    for _ in 0..a.count {
        let v: Vector = laplacian_noise(&p, &mut rng);
        let row: Vec<String> = v.as_slice().iter().map(f64::to_string).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    emit(a.output.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn check(name: &str, pass: bool, detail: impl Serialize) -> serde_json::Value {
    eprintln!("{} {name}", if pass { "PASS" } else { "FAIL" });
    json!({ "name": name, "pass": pass, "detail": detail })
}

pub fn verify(a: VerifyArgs) -> CliResult<ExitCode> {
    if a.samples == 0 || a.trials == 0 {
        return Err(CliError::Usage("--samples and --trials must be positive".into()));
    }
    let seed = a.seed;
    let mut stream = 0u64;
    let mut next = || {
        stream += 1;
        RngState::stream(seed, stream)
    };
    let mut checks = Vec::new();

    for (n, eps) in [(1, 1.0), (2, 1.0), (4, 0.5), (8, 2.0)] {
        let r = radius_ks_test(&PrivacyParams::new(eps, n)?, a.samples, KS_SIGNIFICANCE, &mut next());
        checks.push(check(&format!("radius distribution n={n} epsilon={eps}"), r.pass, &r));
    }
    let r = direction_uniformity_test(&PrivacyParams::new(1.0, 3)?, a.samples, &mut next());
    checks.push(check("direction uniformity n=3", r.pass, &r));
    for (n, eps) in [(1, 1.0), (2, 1.0), (8, 1.0), (300, 1.0)] {
        let r = density_ratio_test(&PrivacyParams::new(eps, n)?, a.samples / 40, 3.0, &mut next());
        checks.push(check(&format!("density ratio n={n}"), r.pass, &r));
    }

    let line = EmbeddingStore::from_entries(
        [("north", 0.0), ("centre", 1.0), ("south", 3.0)]
            .into_iter()
            .map(|(w, x)| Ok((Word::new(w)?, Vector::new(vec![x])?)))
            .collect::<emdp::Result<Vec<_>>>()?,
    )?;
    let words = line.words().to_vec();
    let cfg = PipelineConfig::new(1.0, next().next_u64());
    let r = privacy_ratio_test(&line, &words[0], &words[1], &cfg, a.trials)?;
    checks.push(check("word-level privacy ratio on a 1-D store", r.pass, &r));

    let bag = VecBag::from_rows([vec![0.0, 0.0], vec![1.0, 0.0]])?;
    let r = utility_bound_estimate(&bag, &PrivacyParams::new(1.0, 2)?, 2.0, a.trials, &mut next())?;
    checks.push(check(
        "utility: success rate not below the sound bound",
        r.sound_pass,
        &r,
    ));

    let pass = checks.iter().all(|c| c["pass"] == json!(true));
    let out = json!({
        "config": { "seed": seed, "samples": a.samples, "trials": a.trials, "significance": KS_SIGNIFICANCE },
        "checks": checks,
        "pass": pass,
    });
    emit(a.output.as_deref(), &to_json(&out))?;
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

pub fn eval(a: EvalArgs) -> CliResult<ExitCode> {
    let seed = resolve_seed(a.seed);
    let spec = match &a.spec {
        Some(path) => serde_json::from_str(&read_text(path)?).map_err(|source| CliError::Json {
            path: path.clone(),
            source,
        })?,
        None => SyntheticCorpusSpec::desk_scale(seed),
    };
    let cfg = SweepConfig {
        seed,
        k_topic: a.k,
        rounds: a.rounds,
        ..SweepConfig::default()
    };
    let table = sweep_epsilon(&spec, &a.epsilons, &cfg)?;
    let eps: Vec<String> = a.epsilons.iter().map(f64::to_string).collect();
    let mut text = csv_preamble(&[
        ("seed", seed.to_string()),
        ("epsilons", eps.join(";")),
        ("k", a.k.to_string()),
        ("rounds", a.rounds.to_string()),
        ("corpus", serde_json::to_string(&spec).expect("spec serializes")),
        ("snippets", table.snippets.to_string()),
        ("authors", table.authors.to_string()),
        ("topics", table.topics.to_string()),
    ]);
    text.push_str(&table.to_csv());
    emit(a.output.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}
