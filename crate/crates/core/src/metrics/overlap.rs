use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::text::is_punctuation;

/// Plan property summary for one control strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapStats {
    pub mean_overlap: f64,
    pub max_overlap: f64,
    /// Plan words over summary words.
    pub length_ratio: f64,
}

fn vocabulary<S: AsRef<str>>(tokens: &[S]) -> BTreeSet<String> {
    tokens
        .iter()
        .map(|t| t.as_ref().to_lowercase())
        .filter(|t| !is_punctuation(t))
        .collect()
}

/// Shared vocabulary over the smaller vocabulary. A plan whose words are a
/// subset of the other's scores 1.
pub fn lexical_overlap<S: AsRef<str>, T: AsRef<str>>(a: &[S], b: &[T]) -> f64 {
    let va = vocabulary(a);
    let vb = vocabulary(b);
    let smaller = va.len().min(vb.len());
    if smaller == 0 {
        return 0.0;
    }
    va.intersection(&vb).count() as f64 / smaller as f64
}
