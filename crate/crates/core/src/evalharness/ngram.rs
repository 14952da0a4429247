//! Character n-gram representation and a simplified subsampling attribution
//! in the style of Koppel et al., plus a k-NN topic proxy in the same space.

use std::collections::{BTreeMap, HashMap};

use rand::seq::index::sample;

use super::corpus::LabelledDoc;
use super::inference::majority_of_nearest;
use crate::error::{Error, Result};
use crate::laplace::RngState;
use crate::mechanism::Bag;
use crate::vecspace::Word;

/// Contiguous length-`n` substrings of `w`, counted by multiplicity. A word
/// shorter than `n` yields itself so that no token disappears.
pub fn char_ngrams(w: &Word, n: usize) -> BTreeMap<String, usize> {
    assert!(n >= 1, "n-gram length must be positive");
    let chars: Vec<char> = w.as_str().chars().collect();
    let mut out = BTreeMap::new();
    if chars.len() < n {
        out.insert(w.as_str().to_string(), 1);
        return out;
    }
    for window in chars.windows(n) {
        *out.entry(window.iter().collect()).or_insert(0) += 1;
    }
    out
}

/// n-gram counts of a whole bag, each token weighted by its multiplicity.
pub fn bag_ngrams(bag: &Bag, n: usize) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for (w, c) in bag.counts() {
        for (g, k) in char_ngrams(w, n) {
            *out.entry(g).or_insert(0) += k * c;
        }
    }
    out
}

/// The known set projected onto its `k_features` most frequent n-grams.
#[derive(Clone, Debug)]
pub struct NgramSpace {
    n: usize,
    features: Vec<String>,
    index: HashMap<String, usize>,
    known: Vec<(Vec<f64>, usize, usize)>, // (counts, topic, author)
}

impl NgramSpace {
    /// Feature ties on frequency are broken lexicographically.
    pub fn new(known: &[LabelledDoc], n: usize, k_features: usize) -> Result<Self> {
        if n == 0 || k_features == 0 {
            return Err(Error::InvalidParameter("n and k_features must be positive".into()));
        }
        if known.is_empty() {
            return Err(Error::InvalidParameter("known set is empty".into()));
        }
        let per_doc: Vec<_> = known.iter().map(|d| bag_ngrams(&d.bag, n)).collect();
        let mut totals: BTreeMap<&str, usize> = BTreeMap::new();
        for counts in &per_doc {
            for (g, c) in counts {
                *totals.entry(g.as_str()).or_insert(0) += c;
            }
        }
        let mut ranked: Vec<(&str, usize)> = totals.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let features: Vec<String> = ranked
            .into_iter()
            .take(k_features)
            .map(|(g, _)| g.to_string())
            .collect();
        if features.is_empty() {
            return Err(Error::InvalidParameter("n-gram feature space is empty".into()));
        }
        let index: HashMap<String, usize> = features.iter().enumerate().map(|(i, g)| (g.clone(), i)).collect();
        let mut space = Self {
            n,
            features,
            index,
            known: Vec::with_capacity(known.len()),
        };
        space.known = per_doc
            .iter()
            .zip(known)
            .map(|(counts, d)| (space.project(counts), d.topic, d.author))
            .collect();
        Ok(space)
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    fn project(&self, counts: &BTreeMap<String, usize>) -> Vec<f64> {
        let mut v = vec![0.0; self.features.len()];
        for (g, c) in counts {
            if let Some(&i) = self.index.get(g) {
                v[i] = *c as f64;
            }
        }
        v
    }

    pub fn vectorize(&self, bag: &Bag) -> Vec<f64> {
        self.project(&bag_ngrams(bag, self.n))
    }

    /// Author winning the most of `rounds` random-subspace cosine contests.
    /// Each round keeps `round(keep_fraction · F)` features (at least one);
    /// the winner of a round is the most similar known text, ties to the
    /// earliest. Overall ties go to the smallest author label.
    pub fn attribute(&self, bag: &Bag, rounds: usize, keep_fraction: f64, rng: &mut RngState) -> Result<usize> {
        if rounds == 0 {
            return Err(Error::InvalidParameter("rounds must be positive".into()));
        }
        if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "keep_fraction must lie in (0, 1] (got {keep_fraction})"
            )));
        }
        let query = self.vectorize(bag);
        let f = self.features.len();
        let keep = ((keep_fraction * f as f64).round() as usize).clamp(1, f);
        let mut wins: BTreeMap<usize, usize> = BTreeMap::new();
        for _ in 0..rounds {
            let mask = sample(rng, f, keep).into_vec();
            let mut best = (f64::NEG_INFINITY, 0);
            for (i, (v, _, _)) in self.known.iter().enumerate() {
                let s = masked_cosine(&query, v, &mask);
                if s > best.0 {
                    best = (s, i);
                }
            }
            *wins.entry(self.known[best.1].2).or_insert(0) += 1;
        }
        let top = wins.values().copied().max().expect("rounds ≥ 1");
        Ok(wins.into_iter().find(|&(_, c)| c == top).expect("nonempty").0)
    }

    /// Majority topic among the `k` most cosine-similar known texts.
    pub fn knn_topic(&self, bag: &Bag, k: usize) -> Result<usize> {
        if k == 0 || k > self.known.len() {
            return Err(Error::InvalidParameter(format!(
                "k must be between 1 and {} (got {k})",
                self.known.len()
            )));
        }
        let query = self.vectorize(bag);
        let all: Vec<usize> = (0..self.features.len()).collect();
        let scored = self
            .known
            .iter()
            .enumerate()
            .map(|(i, (v, topic, _))| (1.0 - masked_cosine(&query, v, &all), i, *topic))
            .collect();
        Ok(majority_of_nearest(scored, k))
    }
}

/// Cosine similarity over the coordinates in `mask`; 0 if either side is zero.
fn masked_cosine(a: &[f64], b: &[f64], mask: &[usize]) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for &i in mask {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na.sqrt() * nb.sqrt())
    }
}

/// One-shot attribution; builds the feature space from `known` each call.
pub fn ngram_attribution(
    snippet: &LabelledDoc,
    known: &[LabelledDoc],
    n: usize,
    k_features: usize,
    rounds: usize,
    keep_fraction: f64,
    rng: &mut RngState,
) -> Result<usize> {
    NgramSpace::new(known, n, k_features)?.attribute(&snippet.bag, rounds, keep_fraction, rng)
}
