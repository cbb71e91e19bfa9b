use std::collections::HashMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::MetricsError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        RougeScore { precision, recall, f1 }
    }

    fn from_counts(hits: usize, candidate_total: usize, reference_total: usize) -> Self {
        let ratio = |total: usize| if total == 0 { 0.0 } else { hits as f64 / total as f64 };
        Self::from_pr(ratio(candidate_total), ratio(reference_total))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RougeVariant {
    #[serde(rename = "rouge1")]
    Rouge1,
    #[serde(rename = "rouge2")]
    Rouge2,
    #[serde(rename = "rougeL")]
    RougeL,
}

impl RougeVariant {
    pub const ALL: [RougeVariant; 3] = [RougeVariant::Rouge1, RougeVariant::Rouge2, RougeVariant::RougeL];

    pub fn name(self) -> &'static str {
        match self {
            RougeVariant::Rouge1 => "rouge1",
            RougeVariant::Rouge2 => "rouge2",
            RougeVariant::RougeL => "rougeL",
        }
    }
}

impl FromStr for RougeVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rouge1" | "rouge-1" => Ok(RougeVariant::Rouge1),
            "rouge2" | "rouge-2" => Ok(RougeVariant::Rouge2),
            "rougeL" | "rouge-l" | "rougel" => Ok(RougeVariant::RougeL),
            other => Err(format!("unknown ROUGE variant {other:?}")),
        }
    }
}

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if n == 0 || tokens.len() < n {
        return counts;
    }
    for window in tokens.windows(n) {
        let key: Vec<&str> = window.iter().map(AsRef::as_ref).collect();
        *counts.entry(key).or_insert(0) += 1;
    }
    counts
}

/// ROUGE-N with clipped n-gram counts. Empty n-gram sets score zero.
pub fn rouge_n<S: AsRef<str>, T: AsRef<str>>(candidate: &[S], reference: &[T], n: usize) -> RougeScore {
    let cand = ngram_counts(candidate, n);
    let refs = ngram_counts(reference, n);
    let hits: usize = cand
        .iter()
        .map(|(gram, &c)| refs.get(gram).map_or(0, |&r| c.min(r)))
        .sum();
    RougeScore::from_counts(hits, cand.values().sum(), refs.values().sum())
}

fn lcs_len<S: AsRef<str>, T: AsRef<str>>(a: &[S], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            row[j + 1] = if x.as_ref() == y.as_ref() {
                prev[j] + 1
            } else {
                row[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut row);
    }
    prev[b.len()]
}

/// ROUGE-L from the longest common subsequence.
pub fn rouge_l<S: AsRef<str>, T: AsRef<str>>(candidate: &[S], reference: &[T]) -> RougeScore {
    RougeScore::from_counts(lcs_len(candidate, reference), candidate.len(), reference.len())
}

pub fn score<S: AsRef<str>, T: AsRef<str>>(candidate: &[S], reference: &[T], variant: RougeVariant) -> RougeScore {
    match variant {
        RougeVariant::Rouge1 => rouge_n(candidate, reference, 1),
        RougeVariant::Rouge2 => rouge_n(candidate, reference, 2),
        RougeVariant::RougeL => rouge_l(candidate, reference),
    }
}

/// Score against the reference with the highest F1; ties go to the earliest
/// reference.
pub fn multi_ref_max<S: AsRef<str>, T: AsRef<str>>(
    candidate: &[S],
    references: &[Vec<T>],
    variant: RougeVariant,
) -> Result<RougeScore, MetricsError> {
    let mut best: Option<RougeScore> = None;
    for reference in references {
        let s = score(candidate, reference, variant);
        if best.is_none_or(|b| s.f1 > b.f1) {
            best = Some(s);
        }
    }
    best.ok_or(MetricsError::MissingReference)
}
