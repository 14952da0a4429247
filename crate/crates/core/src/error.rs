use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("vector has no components")]
    EmptyVector,

    #[error("vector component {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },

    #[error("invalid word {0:?}: words are non-empty and contain no whitespace")]
    InvalidWord(String),

    #[error("word {0:?} is not in the embedding vocabulary")]
    OutOfVocabulary(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("bag is empty")]
    EmptyBag,

    #[error("bag sizes differ ({left} vs {right}); use emd_general for unequal sizes")]
    SizeMismatch { left: usize, right: usize },

    #[error("lcm expansion to {required} elements exceeds the cap of {cap}")]
    ExpansionTooLarge { required: usize, cap: usize },

    #[error("brute-force EMD is limited to bags of at most {max} elements (got {size})")]
    BruteForceTooLarge { size: usize, max: usize },

    #[error("no in-vocabulary tokens: nothing to privatize")]
    NothingToPrivatize,

    #[error("document is empty after preprocessing")]
    EmptyDocument,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("precondition violated: the utility bound holds only whenever εNΔ ≤ n/e (εNΔ = {scaled}, n/e = {limit})")]
    UtilityPrecondition { scaled: f64, limit: f64 },
}
