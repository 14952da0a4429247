//! Synthetic author/topic corpora with nested embedding clusters.

use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::embeddings::EmbeddingStore;
use crate::error::{Error, Result};
use crate::laplace::{unit_sphere_sample, RngState};
use crate::mechanism::Bag;
use crate::vecspace::{Vector, Word};

const CONSONANTS: &[u8] = b"bcdfghjklmnprstvwxz";
const VOWELS: &[u8] = b"aeiou";
/// Syllables each author draws its word stems from.
const AUTHOR_SYLLABLES: usize = 5;
/// Distance of author centres from their topic centre, relative to the
/// topic separation.
const AUTHOR_OFFSET: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCorpusSpec {
    pub topics: usize,
    pub authors_per_topic: usize,
    pub vocab_per_topic: usize,
    pub dim: usize,
    pub topic_separation: f64,
    pub author_jitter: f64,
    pub doc_length: usize,
    pub seed: u64,
}

impl SyntheticCorpusSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.topics == 0 || self.authors_per_topic == 0 || self.dim == 0 || self.doc_length == 0 {
            return bad("topics, authors_per_topic, dim and doc_length must be positive");
        }
        if self.topics > self.dim {
            return bad("topics must not exceed dim (topic centres lie on coordinate axes)");
        }
        if self.vocab_per_topic < self.authors_per_topic {
            return bad("vocab_per_topic must be at least authors_per_topic");
        }
        if !(self.author_jitter > 0.0 && self.topic_separation > self.author_jitter) {
            return bad("need topic_separation > author_jitter > 0");
        }
        Ok(())
    }

    /// Two topics of ten authors in eight dimensions, scaled so that
    /// per-word noise at ε = 1 hides authorship while ε = 8 keeps topics.
    pub fn desk_scale(seed: u64) -> Self {
        Self {
            topics: 2,
            authors_per_topic: 10,
            vocab_per_topic: 200,
            dim: 8,
            topic_separation: 1.5,
            author_jitter: 0.4,
            doc_length: 10,
            seed,
        }
    }

    pub fn authors(&self) -> usize {
        self.topics * self.authors_per_topic
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocKind {
    KnownText,
    Snippet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelledDoc {
    pub bag: Bag,
    pub topic: usize,
    pub author: usize,
    pub kind: DocKind,
}

fn syllable(rng: &mut RngState) -> String {
    let c = *CONSONANTS.choose(rng).expect("nonempty") as char;
    let v = *VOWELS.choose(rng).expect("nonempty") as char;
    format!("{c}{v}")
}

/// Builds a vocabulary of `topics` clusters with one sub-cluster per author
/// and draws one known text and one snippet per author.
///
/// Topic centres sit on coordinate axes, `topic_separation` apart. Author
/// `a` writes on topic `a / authors_per_topic`; its centre lies at distance
/// `topic_separation / 4` from the topic centre in a uniform direction, and
/// its words are spread uniformly in radius up to `author_jitter` around
/// it. Growing the jitter towards the separation makes authors overlap.
/// Word strings combine a topic syllable with syllables from the author's
/// own inventory.
pub fn generate_corpus(spec: &SyntheticCorpusSpec) -> Result<(EmbeddingStore, Vec<LabelledDoc>)> {
    spec.validate()?;
    let mut rng = RngState::from_seed(spec.seed);
    let axis = spec.topic_separation / std::f64::consts::SQRT_2;

    let mut entries: Vec<(Word, Vector)> = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    let mut author_words: Vec<Vec<Word>> = vec![Vec::new(); spec.authors()];

    for topic in 0..spec.topics {
        let mut topic_centre = vec![0.0; spec.dim];
        topic_centre[topic] = axis;
        let topic_syllable = syllable(&mut rng);
        for local in 0..spec.authors_per_topic {
            let author = topic * spec.authors_per_topic + local;
            let offset = unit_sphere_sample(spec.dim, &mut rng);
            let centre: Vec<f64> = topic_centre
                .iter()
                .zip(offset.as_slice())
                .map(|(c, o)| c + AUTHOR_OFFSET * spec.topic_separation * o)
                .collect();
            let inventory: Vec<String> = (0..AUTHOR_SYLLABLES).map(|_| syllable(&mut rng)).collect();
            let share = spec.vocab_per_topic / spec.authors_per_topic
                + usize::from(local < spec.vocab_per_topic % spec.authors_per_topic);
            for _ in 0..share {
                let mut text = topic_syllable.clone();
                for _ in 0..2 {
                    text.push_str(inventory.choose(&mut rng).expect("nonempty"));
                }
                while seen.contains(&text) {
                    text.push_str(inventory.choose(&mut rng).expect("nonempty"));
                }
                seen.insert(text.clone());
                let jitter = unit_sphere_sample(spec.dim, &mut rng);
                let radius: f64 = rng.random_range(0.0..1.0);
                let v: Vec<f64> = centre
                    .iter()
                    .zip(jitter.as_slice())
                    .map(|(c, j)| c + spec.author_jitter * radius * j)
                    .collect();
                let word = Word::new(text)?;
                author_words[author].push(word.clone());
                entries.push((word, Vector::new(v)?));
            }
        }
    }

    let mut docs = Vec::with_capacity(2 * spec.authors());
    for kind in [DocKind::KnownText, DocKind::Snippet] {
        for (author, words) in author_words.iter().enumerate() {
            let bag = Bag::from_tokens((0..spec.doc_length).map(|_| words.choose(&mut rng).expect("nonempty").clone()));
            docs.push(LabelledDoc {
                bag,
                topic: author / spec.authors_per_topic,
                author,
                kind,
            });
        }
    }
    Ok((EmbeddingStore::from_entries(entries)?, docs))
}

/// Splits a corpus into known texts and snippets, preserving order.
pub fn split_corpus(docs: &[LabelledDoc]) -> (Vec<LabelledDoc>, Vec<LabelledDoc>) {
    docs.iter().cloned().partition(|d| d.kind == DocKind::KnownText)
}
