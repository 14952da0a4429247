//! Earth Mover's privacy for bags of words: an n-dimensional Laplace
//! mechanism on word embeddings, an exact EMD solver, and the tooling to
//! check both empirically.
//!
//! ```
//! use emdp::{obfuscate_document, preprocess, EmbeddingStore, PipelineConfig, Vector, Word};
//!
//! let store = EmbeddingStore::from_entries(vec![
//!     (Word::new("cat")?, Vector::new(vec![0.0, 0.0])?),
//!     (Word::new("dog")?, Vector::new(vec![1.0, 0.0])?),
//! ])?;
//! let cfg = PipelineConfig::new(2.0, 42);
//! let bag = preprocess("The cat and the dog", &cfg)?;
//! let report = obfuscate_document(&bag, &store, &cfg)?;
//! assert_eq!(report.bag.size(), 2);
//! assert_eq!(report.epsilon_bag, 4.0);
//! # Ok::<(), emdp::Error>(())
//! ```

pub mod embeddings;
pub mod emd;
pub mod error;
pub mod evalharness;
pub mod laplace;
pub mod mechanism;
pub mod vecspace;

pub use embeddings::{load_embeddings, read_embeddings, EmbeddingStore, LoadOptions};
pub use emd::{emd_bruteforce, emd_equal, emd_general, emd_general_capped, TransportPlan, VecBag};
pub use error::{Error, Result};
pub use laplace::{laplacian_noise, noisy_vector, radial_cdf, PrivacyParams, RngState};
pub use mechanism::{
    compose, obfuscate_document, obfuscate_document_with_rng, preprocess, private_bag, Bag, Mechanism,
    ObfuscationReport, OovReport, PipelineConfig,
};
pub use vecspace::{dist_vec, euclidean, manhattan, MetricKind, Vector, Word};
