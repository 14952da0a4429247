//! Real vectors, words, and the ground metrics on them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::embeddings::EmbeddingStore;
use crate::error::{Error, Result};

/// A fixed-dimension vector of finite `f64` components.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Builds a vector, rejecting empty input and non-finite components.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some((index, &value)) = components.iter().enumerate().find(|(_, c)| !c.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self(components))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "vector dimension must be positive");
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// `self - other`.
    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        check_dims(self, other)?;
        Ok(Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    /// `self + scale * direction`.
    pub fn add_scaled(&self, scale: f64, direction: &Vector) -> Result<Vector> {
        check_dims(self, direction)?;
        Ok(Vector(
            self.0.iter().zip(&direction.0).map(|(a, d)| a + scale * d).collect(),
        ))
    }

    pub(crate) fn from_raw_unchecked(components: Vec<f64>) -> Self {
        debug_assert!(!components.is_empty());
        Self(components)
    }
}

impl<'de> Deserialize<'de> for Vector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = Vec::<f64>::deserialize(deserializer)?;
        Vector::new(raw).map_err(serde::de::Error::custom)
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Vector::new(value)
    }
}

/// A vocabulary token: non-empty, no whitespace, compared case-sensitively.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Word(String);

impl Word {
    pub fn new(text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if text.is_empty() || text.chars().any(char::is_whitespace) {
            return Err(Error::InvalidWord(text));
        }
        Ok(Self(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Word {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Word::new(value)
    }
}

impl From<Word> for String {
    fn from(w: Word) -> String {
        w.0
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Ground distance on vectors. The privacy mechanism is defined for
/// [`MetricKind::Euclidean`]; Manhattan is kept for dominance comparisons.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    #[default]
    Euclidean,
    Manhattan,
}

impl MetricKind {
    pub fn distance(self, a: &Vector, b: &Vector) -> Result<f64> {
        match self {
            MetricKind::Euclidean => euclidean(a, b),
            MetricKind::Manhattan => manhattan(a, b),
        }
    }

    /// Distance on raw slices of equal length. Callers check dimensions.
    pub(crate) fn distance_slices(self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        match self {
            MetricKind::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            MetricKind::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }
}

fn check_dims(a: &Vector, b: &Vector) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    Ok(())
}

pub fn euclidean(a: &Vector, b: &Vector) -> Result<f64> {
    check_dims(a, b)?;
    Ok(MetricKind::Euclidean.distance_slices(&a.0, &b.0))
}

pub fn manhattan(a: &Vector, b: &Vector) -> Result<f64> {
    check_dims(a, b)?;
    Ok(MetricKind::Manhattan.distance_slices(&a.0, &b.0))
}

/// Distance between two words through their embeddings. This is only a
/// pseudometric: distinct words sharing a vector are at distance zero.
pub fn dist_vec(w1: &Word, w2: &Word, store: &EmbeddingStore, metric: MetricKind) -> Result<f64> {
    let lookup = |w: &Word| store.embed_word(w).ok_or_else(|| Error::OutOfVocabulary(w.to_string()));
    metric.distance(lookup(w1)?, lookup(w2)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn euclidean_examples() {
        assert_eq!(euclidean(&v(&[0., 0.]), &v(&[0., 0.])).unwrap(), 0.0);
        assert_eq!(euclidean(&v(&[0., 0.]), &v(&[3., 4.])).unwrap(), 5.0);
        assert!((euclidean(&v(&[1., 2., 3.]), &v(&[4., 6., 3.])).unwrap() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn manhattan_examples() {
        assert_eq!(manhattan(&v(&[0., 0.]), &v(&[0., 0.])).unwrap(), 0.0);
        assert_eq!(manhattan(&v(&[0., 0.]), &v(&[3., 4.])).unwrap(), 7.0);
        assert_eq!(manhattan(&v(&[1., -1.]), &v(&[-1., 1.])).unwrap(), 4.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let err = euclidean(&v(&[1.0]), &v(&[1.0, 2.0])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 1, actual: 2 }));
        assert!(manhattan(&v(&[1.0]), &v(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn rejects_bad_vectors_and_words() {
        assert!(matches!(Vector::new(vec![]), Err(Error::EmptyVector)));
        assert!(matches!(
            Vector::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1, .. })
        ));
        assert!(Vector::new(vec![f64::INFINITY]).is_err());
        assert!(Word::new("").is_err());
        assert!(Word::new("two words").is_err());
        assert!(Word::new("tab\there").is_err());
        assert!(Word::new("Chicago").is_ok());
    }

    #[test]
    fn dist_vec_identity_collision_and_oov() {
        let store = EmbeddingStore::from_entries(vec![
            (Word::new("a").unwrap(), v(&[1.0, 1.0])),
            (Word::new("b").unwrap(), v(&[1.0, 1.0])),
            (Word::new("c").unwrap(), v(&[4.0, 5.0])),
        ])
        .unwrap();
        let w = |s: &str| Word::new(s).unwrap();
        assert_eq!(dist_vec(&w("a"), &w("a"), &store, MetricKind::Euclidean).unwrap(), 0.0);
        assert_eq!(dist_vec(&w("a"), &w("b"), &store, MetricKind::Euclidean).unwrap(), 0.0);
        assert_eq!(dist_vec(&w("a"), &w("c"), &store, MetricKind::Euclidean).unwrap(), 5.0);
        match dist_vec(&w("a"), &w("zebra"), &store, MetricKind::Euclidean) {
            Err(Error::OutOfVocabulary(word)) => assert_eq!(word, "zebra"),
            other => panic!("expected OOV error, got {other:?}"),
        }
    }

    fn triple(dim: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
        let c = || proptest::collection::vec(-100.0f64..100.0, dim);
        (c(), c(), c())
    }

    proptest! {
        #[test]
        fn euclidean_triangle_and_symmetry((a, b, c) in (1usize..6).prop_flat_map(triple)) {
            let (a, b, c) = (v(&a), v(&b), v(&c));
            let ab = euclidean(&a, &b).unwrap();
            prop_assert!((ab - euclidean(&b, &a).unwrap()).abs() < 1e-12);
            prop_assert!(ab <= euclidean(&a, &c).unwrap() + euclidean(&c, &b).unwrap() + 1e-9);
        }

        #[test]
        fn manhattan_dominates_euclidean(
            a in proptest::collection::vec(-100.0f64..100.0, 4),
            b in proptest::collection::vec(-100.0f64..100.0, 4),
        ) {
            let (a, b) = (v(&a), v(&b));
            prop_assert!(manhattan(&a, &b).unwrap() + 1e-9 >= euclidean(&a, &b).unwrap());
        }

        #[test]
        fn dist_vec_is_a_pseudometric(
            pts in proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, 3), 3),
        ) {
            let words: Vec<Word> = ["x", "y", "z"].iter().map(|s| Word::new(*s).unwrap()).collect();
            let store = EmbeddingStore::from_entries(
                words.iter().cloned().zip(pts.iter().map(|p| v(p))).collect(),
            ).unwrap();
            let d = |i: usize, j: usize| dist_vec(&words[i], &words[j], &store, MetricKind::Euclidean).unwrap();
            prop_assert!((d(0, 1) - d(1, 0)).abs() < 1e-12);
            prop_assert!(d(0, 1) <= d(0, 2) + d(2, 1) + 1e-9);
        }
    }
}
