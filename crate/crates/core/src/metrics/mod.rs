//! ROUGE-1/2/L, multi-reference aggregation, word-level Levenshtein and
//! vocabulary overlap.

mod levenshtein;
mod overlap;
mod rouge;

pub use levenshtein::{levenshtein, levenshtein_norm};
pub use overlap::{lexical_overlap, OverlapStats};
pub use rouge::{multi_ref_max, rouge_l, rouge_n, score, RougeScore, RougeVariant};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("at least one reference is required")]
    MissingReference,
}
