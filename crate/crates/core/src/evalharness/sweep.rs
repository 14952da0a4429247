//! Correct-prediction counts under obfuscation across a range of ε.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corpus::{generate_corpus, split_corpus, SyntheticCorpusSpec};
use super::inference::{DocRepresentation, KnownIndex};
use super::ngram::NgramSpace;
use crate::error::{Error, Result};
use crate::laplace::RngState;
use crate::mechanism::{obfuscate_document_with_rng, PipelineConfig};

pub const CSV_HEADER: &str = "epsilon,SRauth,SRtopic,DRauth,DRtopic";

/// Inference settings shared by every row of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub seed: u64,
    pub k_topic: usize,
    pub representation: DocRepresentation,
    pub ngram_n: usize,
    pub k_features: usize,
    pub rounds: usize,
    pub keep_fraction: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            k_topic: 5,
            representation: DocRepresentation::Centroid,
            ngram_n: 3,
            k_features: 10_000,
            rounds: 100,
            keep_fraction: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// `None` for the unperturbed row.
    pub epsilon: Option<f64>,
    pub sr_auth: usize,
    pub sr_topic: usize,
    pub dr_auth: usize,
    pub dr_topic: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub snippets: usize,
    pub authors: usize,
    pub topics: usize,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// One line per row under [`CSV_HEADER`]; the unperturbed row reads `none`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let eps = r.epsilon.map_or_else(|| "none".to_string(), |e| e.to_string());
            writeln!(out, "{eps},{},{},{},{}", r.sr_auth, r.sr_topic, r.dr_auth, r.dr_topic).expect("string write");
        }
        out
    }
}

#[derive(Clone, Copy, Debug)]
struct Outcome {
    sr_auth: bool,
    sr_topic: bool,
    dr_auth: bool,
    dr_topic: bool,
}

/// Generates the corpus for `spec`, then for the unperturbed row and each ε
/// obfuscates every snippet and counts correct predictions.
///
/// Task `(row, snippet)` draws from streams `2t` and `2t + 1` of
/// `cfg.seed`, with `t = row · snippets + snippet`, so the table does not
/// depend on how the work is scheduled.
pub fn sweep_epsilon(spec: &SyntheticCorpusSpec, epsilons: &[f64], cfg: &SweepConfig) -> Result<SweepTable> {
    if epsilons.is_empty() {
        return Err(Error::InvalidParameter("epsilon list is empty".into()));
    }
    if let Some(bad) = epsilons.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive and finite (got {bad})"
        )));
    }
    let (store, docs) = generate_corpus(spec)?;
    let (known, snippets) = split_corpus(&docs);
    let index = KnownIndex::new(&known, &store, cfg.representation)?;
    let ngrams = NgramSpace::new(&known, cfg.ngram_n, cfg.k_features)?;

    let levels: Vec<Option<f64>> = std::iter::once(None)
        .chain(epsilons.iter().copied().map(Some))
        .collect();
    let tasks: Vec<(usize, usize)> = (0..levels.len())
        .flat_map(|r| (0..snippets.len()).map(move |s| (r, s)))
        .collect();

    let outcomes = tasks
        .par_iter()
        .map(|&(r, s)| {
            let t = (r * snippets.len() + s) as u64;
            let snippet = &snippets[s];
            let bag = match levels[r] {
                None => snippet.bag.clone(),
                Some(eps) => {
                    let pc = PipelineConfig::new(eps, cfg.seed);
                    obfuscate_document_with_rng(&snippet.bag, &store, &pc, &mut RngState::stream(cfg.seed, 2 * t))?.bag
                }
            };
            let mut rng = RngState::stream(cfg.seed, 2 * t + 1);
            Ok(Outcome {
                sr_auth: index.nn_author(&bag)? == snippet.author,
                sr_topic: index.knn_topic(&bag, cfg.k_topic)? == snippet.topic,
                dr_auth: ngrams.attribute(&bag, cfg.rounds, cfg.keep_fraction, &mut rng)? == snippet.author,
                dr_topic: ngrams.knn_topic(&bag, cfg.k_topic)? == snippet.topic,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let rows = levels
        .iter()
        .zip(outcomes.chunks(snippets.len()))
        .map(|(&epsilon, chunk)| {
            let count = |f: fn(&Outcome) -> bool| chunk.iter().filter(|o| f(o)).count();
            SweepRow {
                epsilon,
                sr_auth: count(|o| o.sr_auth),
                sr_topic: count(|o| o.sr_topic),
                dr_auth: count(|o| o.dr_auth),
                dr_topic: count(|o| o.dr_topic),
            }
        })
        .collect();
    Ok(SweepTable {
        snippets: snippets.len(),
        authors: spec.authors(),
        topics: spec.topics,
        rows,
    })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

/// Per-cell median across tables with the same row layout, as
/// `(epsilon, [SRauth, SRtopic, DRauth, DRtopic])`.
pub fn median_table(tables: &[SweepTable]) -> Result<Vec<(Option<f64>, [f64; 4])>> {
    let first = tables
        .first()
        .ok_or_else(|| Error::InvalidParameter("no tables to summarize".into()))?;
    if tables.iter().any(|t| t.rows.len() != first.rows.len()) {
        return Err(Error::InvalidParameter("tables have different row counts".into()));
    }
    Ok((0..first.rows.len())
        .map(|i| {
            let cell = |f: fn(&SweepRow) -> usize| {
                let mut v: Vec<f64> = tables.iter().map(|t| f(&t.rows[i]) as f64).collect();
                median(&mut v)
            };
            (
                first.rows[i].epsilon,
                [
                    cell(|r| r.sr_auth),
                    cell(|r| r.sr_topic),
                    cell(|r| r.dr_auth),
                    cell(|r| r.dr_topic),
                ],
            )
        })
        .collect())
}
