//! Bag-level and document-level privacy mechanisms.
//!
//! [`private_bag`] perturbs every element of a bag of vectors independently
//! with n-dimensional Laplacian noise. On bags of a fixed size `N` this is
//! `ε·N·E`-private, where `E` is the Earth Mover's distance under the
//! Euclidean ground metric. [`obfuscate_document`] wraps that in the text
//! pipeline: embed the in-vocabulary words, perturb them, and map each
//! noisy vector back to its nearest vocabulary word. The inversion step is
//! post-processing and cannot weaken the guarantee.
//!
//! Callers supply the per-word `ε`; the bag-level figure `ε·N` is reported
//! alongside every document in an [`ObfuscationReport`].

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embeddings::EmbeddingStore;
use crate::emd::VecBag;
use crate::error::{Error, Result};
use crate::laplace::{noisy_vector, PrivacyParams, RngState};
use crate::vecspace::Word;

const DEFAULT_STOPWORDS: &str = include_str!("stopwords.txt");

/// A multiset of words. Iteration and serialization use sorted word order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "BagJson", try_from = "BagJson")]
pub struct Bag {
    counts: BTreeMap<Word, usize>,
}

#[derive(Serialize, Deserialize)]
struct BagJson {
    size: usize,
    counts: BTreeMap<Word, usize>,
}

impl From<Bag> for BagJson {
    fn from(b: Bag) -> Self {
        BagJson {
            size: b.size(),
            counts: b.counts,
        }
    }
}

impl TryFrom<BagJson> for Bag {
    type Error = Error;

    fn try_from(j: BagJson) -> Result<Self> {
        if j.counts.values().any(|&c| c == 0) {
            return Err(Error::InvalidParameter("bag multiplicities must be at least 1".into()));
        }
        let bag = Bag { counts: j.counts };
        if bag.size() != j.size {
            return Err(Error::InvalidParameter(format!(
                "bag declares size {} but counts sum to {}",
                j.size,
                bag.size()
            )));
        }
        Ok(bag)
    }
}

impl Bag {
    pub fn from_tokens<I: IntoIterator<Item = Word>>(tokens: I) -> Self {
        let mut bag = Bag::default();
        for t in tokens {
            bag.insert(t);
        }
        bag
    }

    pub fn insert(&mut self, w: Word) {
        self.insert_n(w, 1);
    }

    pub fn insert_n(&mut self, w: Word, n: usize) {
        if n > 0 {
            *self.counts.entry(w).or_default() += n;
        }
    }

    pub fn count(&self, w: &Word) -> usize {
        self.counts.get(w).copied().unwrap_or(0)
    }

    /// Total multiplicity.
    pub fn size(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    /// `(word, multiplicity)` pairs in sorted word order.
    pub fn counts(&self) -> impl Iterator<Item = (&Word, usize)> {
        self.counts.iter().map(|(w, &c)| (w, c))
    }

    /// Every token, repeated by multiplicity, in sorted word order.
    pub fn tokens(&self) -> impl Iterator<Item = &Word> {
        self.counts.iter().flat_map(|(w, &c)| std::iter::repeat_n(w, c))
    }

    pub fn merge(&mut self, other: &Bag) {
        for (w, c) in other.counts() {
            self.insert_n(w.clone(), c);
        }
    }

    /// Canonical JSON: `{"size": N, "counts": {word: multiplicity, ...}}`, keys sorted.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("bag serialization is infallible")
    }
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub epsilon: f64,
    pub stopwords: HashSet<String>,
    pub truncate_to: Option<usize>,
    pub lowercase: bool,
    pub strip_punctuation: bool,
    pub seed: u64,
}

impl PipelineConfig {
    /// Defaults: bundled English stopwords, lowercasing and punctuation
    /// stripping on, no truncation.
    pub fn new(epsilon: f64, seed: u64) -> Self {
        Self {
            epsilon,
            stopwords: default_stopwords(),
            truncate_to: None,
            lowercase: true,
            strip_punctuation: true,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be > 0 (got {})",
                self.epsilon
            )));
        }
        if self.truncate_to == Some(0) {
            return Err(Error::InvalidParameter("truncate_to must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn default_stopwords() -> HashSet<String> {
    parse_stopwords(DEFAULT_STOPWORDS)
}

fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

/// Reads a stopword file: one word per line, `#` comments allowed.
pub fn load_stopwords(path: impl AsRef<Path>) -> Result<HashSet<String>> {
    let path = path.as_ref();
    std::fs::read_to_string(path)
        .map(|t| parse_stopwords(&t))
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// Text to bag: strip punctuation, lowercase, split on whitespace, drop
/// stopwords, then keep the first `truncate_to` surviving tokens.
pub fn preprocess(text: &str, cfg: &PipelineConfig) -> Result<Bag> {
    let cleaned: String = if cfg.strip_punctuation {
        text.chars()
            .filter(|c| c.is_alphanumeric() || c.is_whitespace())
            .collect()
    } else {
        text.to_string()
    };
    let cleaned = if cfg.lowercase { cleaned.to_lowercase() } else { cleaned };
    let limit = cfg.truncate_to.unwrap_or(usize::MAX);
    let tokens = cleaned
        .split_whitespace()
        .filter(|t| !cfg.stopwords.contains(&t.to_lowercase()))
        .take(limit)
        .map(Word::new)
        .collect::<Result<Vec<_>>>()?;
    if tokens.is_empty() {
        return Err(Error::EmptyDocument);
    }
    Ok(Bag::from_tokens(tokens))
}

/// A randomized map from `I` to `Self::Output`, driven by an explicit generator.
pub trait Mechanism<I: ?Sized> {
    type Output;

    fn sample(&self, input: &I, rng: &mut RngState) -> Result<Self::Output>;
}

/// Sequential composition: run `first`, feed its sampled output to `second`.
#[derive(Clone, Debug)]
pub struct Compose<A, B> {
    pub first: A,
    pub second: B,
}

pub fn compose<A, B>(first: A, second: B) -> Compose<A, B> {
    Compose { first, second }
}

impl<I: ?Sized, A, B> Mechanism<I> for Compose<A, B>
where
    A: Mechanism<I>,
    B: Mechanism<A::Output>,
{
    type Output = B::Output;

    fn sample(&self, input: &I, rng: &mut RngState) -> Result<B::Output> {
        let mid = self.first.sample(input, rng)?;
        self.second.sample(&mid, rng)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Identity;

impl<I: Clone> Mechanism<I> for Identity {
    type Output = I;

    fn sample(&self, input: &I, _rng: &mut RngState) -> Result<I> {
        Ok(input.clone())
    }
}

/// Ignores its input and always returns the same value.
#[derive(Clone, Debug)]
pub struct Constant<T>(pub T);

impl<I: ?Sized, T: Clone> Mechanism<I> for Constant<T> {
    type Output = T;

    fn sample(&self, _input: &I, _rng: &mut RngState) -> Result<T> {
        Ok(self.0.clone())
    }
}

/// Wraps a closure as a mechanism.
pub struct FnMechanism<F>(pub F);

impl<I: ?Sized, O, F> Mechanism<I> for FnMechanism<F>
where
    F: Fn(&I, &mut RngState) -> Result<O>,
{
    type Output = O;

    fn sample(&self, input: &I, rng: &mut RngState) -> Result<O> {
        (self.0)(input, rng)
    }
}

/// Per-element Laplacian perturbation of a bag of vectors.
#[derive(Clone, Copy, Debug)]
pub struct PrivateBag {
    pub params: PrivacyParams,
}

impl Mechanism<VecBag> for PrivateBag {
    type Output = VecBag;

    fn sample(&self, input: &VecBag, rng: &mut RngState) -> Result<VecBag> {
        private_bag(input, &self.params, rng)
    }
}

/// Maps each vector to its nearest vocabulary word.
#[derive(Clone, Copy, Debug)]
pub struct NearestWordInversion<'a> {
    pub store: &'a EmbeddingStore,
}

impl Mechanism<VecBag> for NearestWordInversion<'_> {
    type Output = Bag;

    fn sample(&self, input: &VecBag, _rng: &mut RngState) -> Result<Bag> {
        if input.dim() != self.store.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.store.dim(),
                actual: input.dim(),
            });
        }
        Ok(Bag::from_tokens(
            input.elements().iter().map(|z| self.store.nearest_word(z).clone()),
        ))
    }
}

/// Adds independent `Lap(n, ε)` noise to every element of `bag`.
///
/// One value is drawn from `rng` as a base key; element `i` then uses its
/// own stream of that key, so the output does not depend on thread count.
pub fn private_bag(bag: &VecBag, p: &PrivacyParams, rng: &mut RngState) -> Result<VecBag> {
    if bag.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            actual: bag.dim(),
        });
    }
    let base = rng.next_u64();
    let noisy = bag
        .elements()
        .par_iter()
        .enumerate()
        .map(|(i, x)| noisy_vector(x, p, &mut RngState::stream(base, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    VecBag::new(noisy)
}

/// Out-of-vocabulary words that passed through unperturbed, sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OovReport(pub Vec<Word>);

/// Output of [`obfuscate_document`] and the privacy level it carries.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObfuscationReport {
    pub bag: Bag,
    pub oov: OovReport,
    /// Per-word scale supplied by the caller.
    pub epsilon: f64,
    /// Number of perturbed (in-vocabulary) tokens `N`.
    pub perturbed: usize,
    /// `ε·N`: the bag-level scale of the guarantee between documents whose
    /// in-vocabulary parts both have size `N`.
    pub epsilon_bag: f64,
    /// Whether sizes were equalized by truncation. Without it, two
    /// documents generally have different `N` and no common guarantee applies.
    pub size_equalized: bool,
}

/// Runs the document pipeline with a generator seeded from `cfg.seed`.
pub fn obfuscate_document(bag: &Bag, store: &EmbeddingStore, cfg: &PipelineConfig) -> Result<ObfuscationReport> {
    obfuscate_document_with_rng(bag, store, cfg, &mut RngState::from_seed(cfg.seed))
}

/// The document pipeline with an explicit generator.
pub fn obfuscate_document_with_rng(
    bag: &Bag,
    store: &EmbeddingStore,
    cfg: &PipelineConfig,
    rng: &mut RngState,
) -> Result<ObfuscationReport> {
    cfg.validate()?;
    let (vectors, passthrough) = store.embed_bag(bag)?;
    let params = PrivacyParams::new(cfg.epsilon, store.dim())?;
    let pipeline = compose(PrivateBag { params }, NearestWordInversion { store });
    let mut out = pipeline.sample(&vectors, rng)?;
    out.merge(&passthrough);

    let oov: BTreeSet<Word> = passthrough.counts().map(|(w, _)| w.clone()).collect();
    let perturbed = vectors.size();
    Ok(ObfuscationReport {
        bag: out,
        oov: OovReport(oov.into_iter().collect()),
        epsilon: cfg.epsilon,
        perturbed,
        epsilon_bag: cfg.epsilon * perturbed as f64,
        size_equalized: cfg.truncate_to.is_some(),
    })
}
