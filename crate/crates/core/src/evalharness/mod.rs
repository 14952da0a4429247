//! Verification and evaluation: statistical checks of the mechanism and
//! inference attacks on synthetic author/topic corpora.

pub mod corpus;
pub mod inference;
pub mod ngram;
pub mod privacy;
pub mod stats;
pub mod sweep;
pub mod utility;

pub use corpus::{generate_corpus, split_corpus, DocKind, LabelledDoc, SyntheticCorpusSpec};
pub use inference::{knn_topic, nn_author, DocRepresentation, KnownIndex};
pub use ngram::{bag_ngrams, char_ngrams, ngram_attribution, NgramSpace};
pub use privacy::*;
pub use stats::{ks_test, wilson_interval, KsReport, Z_ONE_SIDED_99, Z_TWO_SIDED_99};
pub use sweep::{median_table, sweep_epsilon, SweepConfig, SweepRow, SweepTable, CSV_HEADER};
pub use utility::{
    sound_utility_bound, theorem_utility_bound, utility_bound_estimate, utility_bound_test, UtilityReport,
};
