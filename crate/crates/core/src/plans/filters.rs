use serde::{Deserialize, Serialize};

use super::QaPair;
use crate::qg::{answer_question, BackendError, QaBackend};
use crate::text::{rouge_tokens, squash_whitespace};

/// How well answering a pair's question recovers its answer. Ordered from
/// worst to best.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundTrip {
    #[default]
    Unchecked,
    Failed,
    Normalized,
    Exact,
}

impl RoundTrip {
    pub fn passed(self) -> bool {
        matches!(self, RoundTrip::Normalized | RoundTrip::Exact)
    }
}

/// Words that never count as answer content for the rheme check.
const STOPWORDS: [&str; 40] = [
    "a", "an", "the", "of", "in", "on", "at", "to", "for", "by", "with", "from", "and", "or", "but", "is", "are",
    "was", "were", "be", "it", "its", "this", "that", "these", "those", "he", "she", "they", "him", "her", "his",
    "them", "their", "we", "our", "you", "your", "i", "my",
];

/// Lowercases, squashes whitespace, strips one leading article and any
/// terminal punctuation.
pub fn normalize_answer(answer: &str) -> String {
    let lowered = squash_whitespace(answer.trim()).to_lowercase();
    let trimmed =
        lowered.trim_end_matches(|c: char| matches!(c, '.' | ',' | ';' | ':' | '!' | '?') || c.is_whitespace());
    let stripped = ["a ", "an ", "the "]
        .iter()
        .find_map(|a| trimmed.strip_prefix(a))
        .unwrap_or(trimmed);
    stripped.trim().to_string()
}

/// Compares a recovered answer with the expected one.
pub fn round_trip(expected: &str, recovered: &str) -> RoundTrip {
    if expected.trim() == recovered.trim() {
        RoundTrip::Exact
    } else if normalize_answer(expected) == normalize_answer(recovered) {
        RoundTrip::Normalized
    } else {
        RoundTrip::Failed
    }
}

/// Answers every question over `context` and records the outcome on each
/// pair. Nothing is dropped.
pub fn score_round_trip(pairs: &mut [QaPair], backend: &dyn QaBackend, context: &str) -> Result<(), BackendError> {
    for pair in pairs {
        let recovered = answer_question(backend, &pair.question, context)?;
        pair.round_trip = round_trip(&pair.answer, &recovered);
    }
    Ok(())
}

/// Keeps the pairs whose question, answered over `context`, gives back the
/// pair's answer up to [`normalize_answer`].
pub fn filter_round_trip(
    pairs: Vec<QaPair>,
    backend: &dyn QaBackend,
    context: &str,
) -> Result<Vec<QaPair>, BackendError> {
    let mut pairs = pairs;
    score_round_trip(&mut pairs, backend, context)?;
    Ok(pairs.into_iter().filter(QaPair::round_trip_ok).collect())
}

fn content_tokens(text: &str) -> Vec<String> {
    rouge_tokens(text)
        .into_iter()
        .filter(|t| !STOPWORDS.contains(&t.as_str()))
        .collect()
}

/// True when the question already states every content word of the answer.
pub fn gives_away_answer(pair: &QaPair) -> bool {
    let question = content_tokens(&pair.question);
    content_tokens(&pair.answer).iter().all(|t| question.contains(t))
}

/// Drops pairs whose question gives the answer away.
pub fn filter_rheme(pairs: Vec<QaPair>) -> Vec<QaPair> {
    pairs.into_iter().filter(|p| !gives_away_answer(p)).collect()
}

/// Restores coverage of sentences that lost all their pairs.
///
/// For each sentence index present in `original` but absent from `pairs`,
/// the single best original pair whose round trip passed is put back
/// (exact before normalized, earlier before later). Restored pairs go before
/// the first kept pair of a later sentence. Never removes anything.
pub fn filter_coverage(pairs: Vec<QaPair>, original: &[QaPair]) -> Vec<QaPair> {
    let mut out = pairs;
    let mut orphans: Vec<usize> = original.iter().map(|p| p.sentence_index).collect();
    orphans.dedup();
    orphans.retain(|s| !out.iter().any(|p| p.sentence_index == *s));
    for sentence in orphans {
        let best = original
            .iter()
            .filter(|p| p.sentence_index == sentence && p.round_trip_ok())
            .fold(None::<&QaPair>, |best, p| match best {
                Some(b) if b.round_trip >= p.round_trip => Some(b),
                _ => Some(p),
            });
        if let Some(pair) = best {
            let at = out
                .iter()
                .position(|p| p.sentence_index > sentence)
                .unwrap_or(out.len());
            out.insert(at, pair.clone());
        }
    }
    out
}
