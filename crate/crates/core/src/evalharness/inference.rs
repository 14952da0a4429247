//! Same-representation inference: nearest-neighbour author and topic
//! prediction over word-embedding document representations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::corpus::LabelledDoc;
use crate::embeddings::EmbeddingStore;
use crate::emd::{emd_general, VecBag};
use crate::error::{Error, Result};
use crate::mechanism::Bag;
use crate::vecspace::{euclidean, MetricKind, Vector};

/// How a document is turned into something with a Euclidean-style distance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocRepresentation {
    /// Mean of the in-vocabulary word vectors.
    #[default]
    Centroid,
    /// The bag of in-vocabulary word vectors, compared by Earth Mover's distance.
    Emd,
}

#[derive(Clone, Debug)]
enum Repr {
    Centroid(Vector),
    Bag(VecBag),
}

fn represent(bag: &Bag, store: &EmbeddingStore, how: DocRepresentation) -> Result<Repr> {
    let (vectors, _) = store.embed_bag(bag)?;
    Ok(match how {
        DocRepresentation::Centroid => {
            let mut mean = vec![0.0; vectors.dim()];
            for v in vectors.elements() {
                for (m, c) in mean.iter_mut().zip(v.as_slice()) {
                    *m += c;
                }
            }
            let n = vectors.size() as f64;
            Repr::Centroid(Vector::new(mean.into_iter().map(|m| m / n).collect())?)
        }
        DocRepresentation::Emd => Repr::Bag(vectors),
    })
}

fn distance(a: &Repr, b: &Repr) -> Result<f64> {
    match (a, b) {
        (Repr::Centroid(x), Repr::Centroid(y)) => euclidean(x, y),
        (Repr::Bag(x), Repr::Bag(y)) => emd_general(x, y, MetricKind::Euclidean).map(|(d, _)| d),
        _ => unreachable!("representations of one index share a kind"),
    }
}

/// Majority label among `(distance, index, label)` neighbours; distance ties
/// go to the lower index, vote ties to the smaller label.
pub(crate) fn majority_of_nearest(mut scored: Vec<(f64, usize, usize)>, k: usize) -> usize {
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
    for &(_, _, label) in scored.iter().take(k) {
        *votes.entry(label).or_default() += 1;
    }
    let top = votes.values().copied().max().unwrap_or(0);
    votes
        .into_iter()
        .find(|&(_, v)| v == top)
        .map(|(label, _)| label)
        .expect("k ≥ 1 neighbours")
}

/// Precomputed representations of the known-author texts.
pub struct KnownIndex<'a> {
    store: &'a EmbeddingStore,
    how: DocRepresentation,
    known: Vec<(Repr, usize, usize)>, // (representation, topic, author)
}

impl<'a> KnownIndex<'a> {
    pub fn new(known: &[LabelledDoc], store: &'a EmbeddingStore, how: DocRepresentation) -> Result<Self> {
        if known.is_empty() {
            return Err(Error::InvalidParameter("known set is empty".into()));
        }
        let known = known
            .iter()
            .map(|d| Ok((represent(&d.bag, store, how)?, d.topic, d.author)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { store, how, known })
    }

    pub fn len(&self) -> usize {
        self.known.len()
    }

    pub fn is_empty(&self) -> bool {
        self.known.is_empty()
    }

    fn scored(&self, bag: &Bag, label: impl Fn(usize, usize) -> usize) -> Result<Vec<(f64, usize, usize)>> {
        let query = represent(bag, self.store, self.how)?;
        self.known
            .iter()
            .enumerate()
            .map(|(i, (r, topic, author))| Ok((distance(&query, r)?, i, label(*topic, *author))))
            .collect()
    }

    /// Majority topic among the `k` nearest known texts.
    pub fn knn_topic(&self, bag: &Bag, k: usize) -> Result<usize> {
        if k == 0 || k > self.len() {
            return Err(Error::InvalidParameter(format!(
                "k must be between 1 and {} (got {k})",
                self.len()
            )));
        }
        Ok(majority_of_nearest(self.scored(bag, |t, _| t)?, k))
    }

    /// Author of the nearest known text.
    pub fn nn_author(&self, bag: &Bag) -> Result<usize> {
        Ok(majority_of_nearest(self.scored(bag, |_, a| a)?, 1))
    }
}

/// k-NN topic prediction with centroid representations.
pub fn knn_topic(snippet: &LabelledDoc, known: &[LabelledDoc], store: &EmbeddingStore, k: usize) -> Result<usize> {
    KnownIndex::new(known, store, DocRepresentation::Centroid)?.knn_topic(&snippet.bag, k)
}

/// 1-NN author prediction with centroid representations.
pub fn nn_author(snippet: &LabelledDoc, known: &[LabelledDoc], store: &EmbeddingStore) -> Result<usize> {
    KnownIndex::new(known, store, DocRepresentation::Centroid)?.nn_author(&snippet.bag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalharness::corpus::{generate_corpus, split_corpus, DocKind, SyntheticCorpusSpec};
    use crate::vecspace::Word;

    fn w(s: &str) -> Word {
        Word::new(s).unwrap()
    }

    fn toy() -> (EmbeddingStore, Vec<LabelledDoc>) {
        let store = EmbeddingStore::from_entries(
            [("a", 0.0), ("b", 1.0), ("c", 10.0), ("d", 11.0)]
                .iter()
                .map(|(s, x)| (w(s), Vector::new(vec![*x, 0.0]).unwrap()))
                .collect(),
        )
        .unwrap();
        let doc = |toks: &[&str], topic, author| LabelledDoc {
            bag: Bag::from_tokens(toks.iter().map(|t| w(t))),
            topic,
            author,
            kind: DocKind::KnownText,
        };
        let known = vec![
            doc(&["a", "a"], 0, 0),
            doc(&["b", "b"], 0, 1),
            doc(&["c", "c"], 1, 2),
            doc(&["d", "d"], 1, 3),
        ];
        (store, known)
    }

    #[test]
    fn exact_match_returns_own_labels() {
        let (store, known) = toy();
        for d in &known {
            assert_eq!(knn_topic(d, &known, &store, 1).unwrap(), d.topic);
            assert_eq!(nn_author(d, &known, &store).unwrap(), d.author);
        }
    }

    #[test]
    fn majority_and_ties() {
        let (store, known) = toy();
        let snippet = LabelledDoc {
            bag: Bag::from_tokens([w("a"), w("b")]),
            topic: 0,
            author: 0,
            kind: DocKind::Snippet,
        };
        assert_eq!(knn_topic(&snippet, &known, &store, 3).unwrap(), 0);
        // distance tie between authors 0 and 1 → lower index wins
        assert_eq!(nn_author(&snippet, &known, &store).unwrap(), 0);
        // 2-2 vote tie → smaller label
        assert_eq!(knn_topic(&snippet, &known, &store, 4).unwrap(), 0);
        assert_eq!(majority_of_nearest(vec![(1.0, 0, 5), (1.0, 1, 2)], 2), 2);
        assert!(knn_topic(&snippet, &known, &store, 5).is_err());
        assert!(knn_topic(&snippet, &known, &store, 0).is_err());
    }

    #[test]
    fn fully_oov_snippet_is_an_error() {
        let (store, known) = toy();
        let snippet = LabelledDoc {
            bag: Bag::from_tokens([w("zzz")]),
            topic: 0,
            author: 0,
            kind: DocKind::Snippet,
        };
        assert!(nn_author(&snippet, &known, &store).is_err());
    }

    #[test]
    fn emd_representation_agrees_on_toy() {
        let (store, known) = toy();
        let idx = KnownIndex::new(&known, &store, DocRepresentation::Emd).unwrap();
        assert_eq!(idx.nn_author(&Bag::from_tokens([w("c"), w("d"), w("d")])).unwrap(), 3);
        assert_eq!(idx.knn_topic(&Bag::from_tokens([w("c")]), 2).unwrap(), 1);
    }

    #[test]
    fn separated_clusters_are_classified_perfectly() {
        let spec = SyntheticCorpusSpec {
            topics: 2,
            authors_per_topic: 10,
            vocab_per_topic: 200,
            dim: 8,
            topic_separation: 40.0,
            author_jitter: 2.0,
            doc_length: 30,
            seed: 3,
        };
        let (store, docs) = generate_corpus(&spec).unwrap();
        let (known, snippets) = split_corpus(&docs);
        let idx = KnownIndex::new(&known, &store, DocRepresentation::Centroid).unwrap();
        for s in &snippets {
            assert_eq!(idx.knn_topic(&s.bag, 5).unwrap(), s.topic);
            assert_eq!(idx.nn_author(&s.bag).unwrap(), s.author);
        }
    }

    #[test]
    fn overlapping_authors_degrade_toward_chance() {
        let base = SyntheticCorpusSpec {
            topics: 2,
            authors_per_topic: 10,
            vocab_per_topic: 200,
            dim: 8,
            topic_separation: 40.0,
            author_jitter: 8.0,
            doc_length: 30,
            seed: 3,
        };
        let correct = |jitter: f64| -> usize {
            (0..5)
                .map(|s| {
                    let spec = SyntheticCorpusSpec {
                        author_jitter: jitter,
                        seed: 100 + s,
                        ..base.clone()
                    };
                    let (store, docs) = generate_corpus(&spec).unwrap();
                    let (known, snippets) = split_corpus(&docs);
                    let idx = KnownIndex::new(&known, &store, DocRepresentation::Centroid).unwrap();
                    snippets
                        .iter()
                        .filter(|d| idx.nn_author(&d.bag).unwrap() == d.author)
                        .count()
                })
                .sum()
        };
        let tight = correct(2.0);
        let overlapping = correct(39.0);
        assert_eq!(tight, 100);
        assert!(overlapping < tight, "{overlapping} vs {tight}");
    }
}
