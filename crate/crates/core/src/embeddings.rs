//! Word embedding store: the `Vec` map from words to vectors and its
//! nearest-word inverse.
//!
//! Files are read in the word2vec text format:
//!
//! ```text
//! <count> <dim>
//! <word> <f1> ... <fdim>
//! ```
//!
//! Vectors are stored exactly as read. They are never normalized, since the
//! mechanism's noise scale is calibrated against raw Euclidean distances.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::emd::VecBag;
use crate::error::{Error, Result};
use crate::mechanism::Bag;
use crate::vecspace::{Vector, Word};

/// Vocabulary sizes above this are scanned in parallel by [`EmbeddingStore::nearest_word`].
const PARALLEL_SCAN_MIN: usize = 4096;

#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    /// Keep only the first `max_vocab` rows (file order, i.e. frequency order
    /// for the standard distributions).
    pub max_vocab: Option<usize>,
    /// Lowercase keys at load time. On collision the first row wins.
    pub lowercase_vocab: bool,
}

#[derive(Clone, Debug)]
pub struct EmbeddingStore {
    dim: usize,
    words: Vec<Word>,
    vectors: Vec<Vector>,
    index: HashMap<Word, usize>,
}

impl EmbeddingStore {
    /// Builds a store from `(word, vector)` pairs in the given order.
    pub fn from_entries(entries: Vec<(Word, Vector)>) -> Result<Self> {
        let dim = entries
            .first()
            .map(|(_, v)| v.dim())
            .ok_or_else(|| Error::InvalidParameter("embedding store needs at least one entry".into()))?;
        let mut store = Self {
            dim,
            words: Vec::with_capacity(entries.len()),
            vectors: Vec::with_capacity(entries.len()),
            index: HashMap::with_capacity(entries.len()),
        };
        for (word, vector) in entries {
            if vector.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: vector.dim(),
                });
            }
            if store.index.contains_key(&word) {
                return Err(Error::InvalidParameter(format!("duplicate word {word:?}")));
            }
            store.push(word, vector);
        }
        Ok(store)
    }

    fn push(&mut self, word: Word, vector: Vector) {
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.vectors.push(vector);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Word, &Vector)> {
        self.words.iter().zip(&self.vectors)
    }

    /// Position of `w` in file order.
    pub fn position(&self, w: &Word) -> Option<usize> {
        self.index.get(w).copied()
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.index.contains_key(w)
    }

    /// The stored vector for `w`; case-sensitive exact match.
    pub fn embed_word(&self, w: &Word) -> Option<&Vector> {
        self.index.get(w).map(|&i| &self.vectors[i])
    }

    /// Splits a bag into its embedded in-vocabulary part and the
    /// out-of-vocabulary tokens, preserving multiplicities.
    ///
    /// Elements of the returned [`VecBag`] follow the bag's canonical
    /// (sorted) token order.
    pub fn embed_bag(&self, bag: &Bag) -> Result<(VecBag, Bag)> {
        let mut vectors = Vec::new();
        let mut passthrough = Bag::default();
        for (word, count) in bag.counts() {
            match self.embed_word(word) {
                Some(v) => vectors.extend(std::iter::repeat_n(v, count).cloned()),
                None => passthrough.insert_n(word.clone(), count),
            }
        }
        if vectors.is_empty() {
            return Err(Error::NothingToPrivatize);
        }
        Ok((VecBag::new(vectors)?, passthrough))
    }

    /// The word whose vector is Euclidean-closest to `z`, scanning the whole
    /// vocabulary. Ties go to the earliest store position.
    ///
    /// # Panics
    ///
    /// If `z` has the wrong dimension.
    pub fn nearest_word(&self, z: &Vector) -> &Word {
        assert_eq!(z.dim(), self.dim, "query dimension must match the store");
        let query = z.as_slice();
        let sq = |i: usize| -> f64 {
            self.vectors[i]
                .as_slice()
                .iter()
                .zip(query)
                .map(|(a, b)| (a - b) * (a - b))
                .sum()
        };
        let better = |a: (f64, usize), b: (f64, usize)| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a };
        let (_, best) = if self.len() >= PARALLEL_SCAN_MIN {
            (0..self.len())
                .into_par_iter()
                .map(|i| (sq(i), i))
                .reduce(|| (f64::INFINITY, usize::MAX), better)
        } else {
            (0..self.len())
                .map(|i| (sq(i), i))
                .fold((f64::INFINITY, usize::MAX), better)
        };
        &self.words[best]
    }
}

/// Loads a word2vec text file.
pub fn load_embeddings(path: impl AsRef<Path>, options: LoadOptions) -> Result<EmbeddingStore> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_embeddings(BufReader::new(file), path, options)
}

/// Parses word2vec text from any reader; `origin` is used in error messages.
pub fn read_embeddings<R: BufRead>(reader: R, origin: &Path, options: LoadOptions) -> Result<EmbeddingStore> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(origin),
        line,
        message,
    };
    let io_err = |source| Error::Io {
        path: PathBuf::from(origin),
        source,
    };

    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing header line".into()))?
        .map_err(io_err)?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (count, dim) = match fields.as_slice() {
        [c, d] => match (c.parse::<usize>(), d.parse::<usize>()) {
            (Ok(c), Ok(d)) if d > 0 => (c, d),
            _ => return Err(parse_err(1, format!("malformed header {header:?}"))),
        },
        _ => {
            return Err(parse_err(
                1,
                format!("malformed header {header:?}, expected \"<count> <dim>\""),
            ))
        }
    };
    let wanted = options.max_vocab.map_or(count, |m| m.min(count));

    let mut store = EmbeddingStore {
        dim,
        words: Vec::with_capacity(wanted),
        vectors: Vec::with_capacity(wanted),
        index: HashMap::with_capacity(wanted),
    };
    let mut rows_read = 0usize;
    for (offset, line) in lines.enumerate() {
        if rows_read == wanted {
            break;
        }
        let lineno = offset + 2;
        let line = line.map_err(io_err)?;
        let line = line.trim_end_matches(['\r', '\n', ' ']);
        let mut tokens = line.split(' ');
        let raw_word = tokens.next().unwrap_or_default();
        let rest: Vec<&str> = tokens.collect();
        if rest.len() != dim {
            return Err(parse_err(
                lineno,
                format!("expected a word and {dim} values, found {} fields", rest.len() + 1),
            ));
        }
        let components = rest
            .iter()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| parse_err(lineno, format!("unparseable float {t:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let vector = Vector::new(components).map_err(|e| parse_err(lineno, e.to_string()))?;
        let key = if options.lowercase_vocab {
            raw_word.to_lowercase()
        } else {
            raw_word.to_string()
        };
        let word = Word::new(key).map_err(|e| parse_err(lineno, e.to_string()))?;
        rows_read += 1;
        if store.index.contains_key(&word) {
            if options.lowercase_vocab {
                continue;
            }
            return Err(parse_err(lineno, format!("duplicate word {word:?}")));
        }
        store.push(word, vector);
    }
    if rows_read < wanted {
        return Err(parse_err(
            rows_read + 2,
            format!("header declares {count} rows but the file ends after {rows_read}"),
        ));
    }
    if store.is_empty() {
        return Err(parse_err(1, "embedding file has no rows".into()));
    }
    Ok(store)
}
