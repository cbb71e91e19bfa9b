//! Gap-sentence selection: score sentences by leave-one-out ROUGE-1 against
//! the rest of the document, select the top fraction, mask most of them and
//! concatenate all selected sentences into the pseudo-summary.

use std::collections::HashMap;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Document;
use crate::rng::keyed_rng;
use crate::text::{rouge_tokens, MASK_TOKEN};

pub const DEFAULT_GSR: f64 = 0.45;
pub const DEFAULT_MASK_RATE: f64 = 0.8;

#[derive(Debug, Error, PartialEq)]
pub enum GsgError {
    #[error("document has no sentences")]
    EmptyDocument,
    #[error("sentence index {index} out of range for {len} sentences")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("ratio {0} outside its allowed range")]
    InvalidRatio(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSelection {
    /// Ascending sentence indices.
    pub selected: Vec<usize>,
    /// Self-ROUGE F1 of every sentence in the document.
    pub scores: Vec<f64>,
    pub masked: Vec<usize>,
    pub kept: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskedDocument {
    pub text: String,
    /// Original sentence index behind each sentinel, in order.
    pub mask_positions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PseudoSummary {
    /// Source sentence index of each kept sentence.
    pub indices: Vec<usize>,
    pub sentences: Vec<String>,
    pub text: String,
    /// Trailing sentences were dropped, or the single kept one is over budget.
    pub truncated: bool,
}

fn round_half_up(x: f64) -> usize {
    // the epsilon absorbs representation error in products like 0.45 * 10
    (x + 0.5 + 1e-9).floor().max(0.0) as usize
}

/// Number of gap sentences for `n` sentences: `clamp(round(gsr * n), 1, n)`.
pub fn selection_count(n: usize, gsr: f64) -> usize {
    if n == 0 {
        return 0;
    }
    round_half_up(gsr * n as f64).clamp(1, n)
}

/// Number of masked sentences among `k` selected: `clamp(round(rate * k), 1, k)`.
pub fn mask_count(k: usize, mask_rate: f64) -> usize {
    if k == 0 {
        return 0;
    }
    round_half_up(mask_rate * k as f64).clamp(1, k)
}

/// ROUGE-1 F1 of each sentence against the concatenation of all the others.
pub fn score_gap_sentences(doc: &Document) -> Result<Vec<f64>, GsgError> {
    if doc.sentences.is_empty() {
        return Err(GsgError::EmptyDocument);
    }
    let sentence_tokens: Vec<Vec<String>> = doc.sentence_texts().map(rouge_tokens).collect();
    let mut totals: HashMap<&str, usize> = HashMap::new();
    for tokens in &sentence_tokens {
        for t in tokens {
            *totals.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    let total_len: usize = sentence_tokens.iter().map(Vec::len).sum();

    let scores = sentence_tokens
        .iter()
        .map(|tokens| {
            let mut own: HashMap<&str, usize> = HashMap::new();
            for t in tokens {
                *own.entry(t.as_str()).or_insert(0) += 1;
            }
            let hits: usize = own.iter().map(|(t, &c)| c.min(totals[t] - c)).sum();
            // F1 = 2h / (|s| + |rest|). One correctly rounded division, so
            // equal ratios compare equal and ties fall to the lower index.
            if hits == 0 {
                0.0
            } else {
                2.0 * hits as f64 / total_len as f64
            }
        })
        .collect();
    Ok(scores)
}

/// Picks the top `clamp(round(gsr * n), 1, n)` sentences by self-ROUGE (ties
/// to the lower index) and masks a seeded-random `round(mask_rate * k)` of
/// them; the rest stay visible in the input.
pub fn select_gap_sentences(doc: &Document, gsr: f64, mask_rate: f64, seed: u64) -> Result<GapSelection, GsgError> {
    if !(gsr > 0.0 && gsr <= 1.0) {
        return Err(GsgError::InvalidRatio(gsr));
    }
    if !(0.0..=1.0).contains(&mask_rate) {
        return Err(GsgError::InvalidRatio(mask_rate));
    }
    let scores = score_gap_sentences(doc)?;
    let n = scores.len();
    let k = selection_count(n, gsr);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut selected = order[..k].to_vec();
    selected.sort_unstable();

    let m = mask_count(k, mask_rate);
    let mut rng = keyed_rng(seed, &doc.id, "mask");
    let mut chosen = sample(&mut rng, k, m).into_vec();
    chosen.sort_unstable();
    let masked: Vec<usize> = chosen.iter().map(|&i| selected[i]).collect();
    let kept: Vec<usize> = selected.iter().copied().filter(|i| !masked.contains(i)).collect();

    Ok(GapSelection {
        selected,
        scores,
        masked,
        kept,
    })
}

fn check_indices(doc: &Document, sel: &GapSelection) -> Result<(), GsgError> {
    let len = doc.sentences.len();
    match sel
        .selected
        .iter()
        .chain(&sel.masked)
        .chain(&sel.kept)
        .find(|&&i| i >= len)
    {
        Some(&index) => Err(GsgError::IndexOutOfRange { index, len }),
        None => Ok(()),
    }
}

/// Replaces every masked sentence with one `<mask>` sentinel, keeping all
/// other text (including inter-sentence whitespace) verbatim.
pub fn apply_mask(doc: &Document, sel: &GapSelection) -> Result<MaskedDocument, GsgError> {
    check_indices(doc, sel)?;
    let mut text = String::with_capacity(doc.text.len());
    let mut cursor = 0;
    let mut mask_positions = Vec::with_capacity(sel.masked.len());
    for (i, span) in doc.sentences.iter().enumerate() {
        if sel.masked.contains(&i) {
            text.push_str(&doc.text[cursor..span.start]);
            text.push_str(MASK_TOKEN);
            mask_positions.push(i);
            cursor = span.end;
        }
    }
    text.push_str(&doc.text[cursor..]);
    Ok(MaskedDocument { text, mask_positions })
}

/// Concatenates the selected sentences in document order, dropping whole
/// trailing sentences beyond `target_budget` tokens (at least one is kept).
pub fn build_pseudo_summary(
    doc: &Document,
    sel: &GapSelection,
    target_budget: usize,
) -> Result<PseudoSummary, GsgError> {
    check_indices(doc, sel)?;
    if sel.selected.is_empty() {
        return Err(GsgError::EmptyDocument);
    }
    let mut indices = Vec::new();
    let mut used = 0;
    for &i in &sel.selected {
        let tokens = doc.sentences[i].token_count;
        if !indices.is_empty() && used + tokens > target_budget {
            break;
        }
        used += tokens;
        indices.push(i);
    }
    let truncated = indices.len() < sel.selected.len() || used > target_budget;
    let sentences: Vec<String> = indices.iter().map(|&i| doc.sentence(i).to_string()).collect();
    Ok(PseudoSummary {
        text: sentences.join(" "),
        indices,
        sentences,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Origin, SentenceSpan};
    use crate::text::token_count;

    /// Builds a document whose sentences are exactly `sentences`, joined by
    /// single spaces.
    fn doc(sentences: &[&str]) -> Document {
        let text = sentences.join(" ");
        let mut spans = Vec::new();
        let mut at = 0;
        for s in sentences {
            spans.push(SentenceSpan {
                start: at,
                end: at + s.len(),
                token_count: token_count(s),
            });
            at += s.len() + 1;
        }
        Document {
            id: "doc".into(),
            text,
            sentences: spans,
            origin: Origin {
                record_id: "doc".into(),
                chunk_index: 0,
            },
            truncated: false,
            voices: Vec::new(),
        }
    }

    #[test]
    fn leave_one_out_scores() {
        let d = doc(&["x y z", "x y w", "q r s"]);
        let scores = score_gap_sentences(&d).unwrap();
        // A vs [x y w q r s]: hits 2, P 2/3, R 2/6 -> F1 4/9
        assert!((scores[0] - 4.0 / 9.0).abs() < 1e-12);
        assert!((scores[1] - 4.0 / 9.0).abs() < 1e-12);
        assert_eq!(scores[2], 0.0);
    }

    #[test]
    fn identical_sentences_score_equally() {
        let scores = score_gap_sentences(&doc(&["a b.", "a b.", "a b.", "a b."])).unwrap();
        assert!(scores.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn single_sentence_scores_zero() {
        assert_eq!(score_gap_sentences(&doc(&["only one here"])).unwrap(), [0.0]);
    }

    #[test]
    fn empty_document_is_rejected() {
        let mut d = doc(&["a"]);
        d.sentences.clear();
        assert_eq!(score_gap_sentences(&d), Err(GsgError::EmptyDocument));
        assert_eq!(select_gap_sentences(&d, 0.45, 0.8, 1), Err(GsgError::EmptyDocument));
    }

    #[test]
    fn ten_sentences_give_five_selected_four_masked() {
        let sentences: Vec<String> = (0..10).map(|i| format!("s{i} common words.")).collect();
        let refs: Vec<&str> = sentences.iter().map(String::as_str).collect();
        let sel = select_gap_sentences(&doc(&refs), 0.45, 0.8, 3).unwrap();
        assert_eq!(sel.selected.len(), 5);
        assert_eq!(sel.masked.len(), 4);
        assert_eq!(sel.kept.len(), 1);
    }

    #[test]
    fn one_sentence_is_selected_and_masked() {
        let sel = select_gap_sentences(&doc(&["Alone."]), 0.45, 0.8, 0).unwrap();
        assert_eq!((sel.selected, sel.masked, sel.kept), (vec![0], vec![0], vec![]));
    }

    #[test]
    fn ties_go_to_lower_indices() {
        let sel = select_gap_sentences(&doc(&["a b", "a b", "a b", "a b"]), 0.5, 0.8, 0).unwrap();
        assert_eq!(sel.selected, [0, 1]);
    }

    #[test]
    fn invalid_ratios() {
        let d = doc(&["a"]);
        assert_eq!(select_gap_sentences(&d, 0.0, 0.8, 0), Err(GsgError::InvalidRatio(0.0)));
        assert_eq!(select_gap_sentences(&d, 1.5, 0.8, 0), Err(GsgError::InvalidRatio(1.5)));
        assert_eq!(
            select_gap_sentences(&d, 0.5, -0.1, 0),
            Err(GsgError::InvalidRatio(-0.1))
        );
    }

    #[test]
    fn mask_split_depends_only_on_seed_and_id() {
        let sentences: Vec<String> = (0..20).map(|i| format!("w{i} shared text.")).collect();
        let refs: Vec<&str> = sentences.iter().map(String::as_str).collect();
        let d = doc(&refs);
        let a = select_gap_sentences(&d, 0.45, 0.8, 11).unwrap();
        let b = select_gap_sentences(&d, 0.45, 0.8, 11).unwrap();
        assert_eq!(a, b);
        let splits: std::collections::BTreeSet<Vec<usize>> = (0..20)
            .map(|seed| select_gap_sentences(&d, 0.45, 0.8, seed).unwrap().kept)
            .collect();
        assert!(splits.len() > 1, "kept sentences should vary with the seed");
    }

    fn selection(selected: &[usize], masked: &[usize]) -> GapSelection {
        GapSelection {
            selected: selected.to_vec(),
            scores: Vec::new(),
            masked: masked.to_vec(),
            kept: selected.iter().copied().filter(|i| !masked.contains(i)).collect(),
        }
    }

    #[test]
    fn masking_substitutes_sentences() {
        let d = doc(&["A", "B", "C"]);
        assert_eq!(apply_mask(&d, &selection(&[1], &[1])).unwrap().text, "A <mask> C");
        let both = apply_mask(&d, &selection(&[0, 1], &[0, 1])).unwrap();
        assert_eq!(both.text, "<mask> <mask> C");
        assert_eq!(both.mask_positions, [0, 1]);
        assert_eq!(apply_mask(&d, &selection(&[2], &[])).unwrap().text, "A B C");
    }

    #[test]
    fn masking_keeps_original_whitespace() {
        let d = Document::from_text("d", "One here.\n\nTwo there.  Three now.").unwrap();
        let m = apply_mask(&d, &selection(&[1], &[1])).unwrap();
        assert_eq!(m.text, "One here.\n\n<mask>  Three now.");
    }

    #[test]
    fn out_of_range_selection() {
        let d = doc(&["A", "B"]);
        assert_eq!(
            apply_mask(&d, &selection(&[5], &[5])),
            Err(GsgError::IndexOutOfRange { index: 5, len: 2 })
        );
        assert!(build_pseudo_summary(&d, &selection(&[0, 2], &[0]), 10).is_err());
    }

    #[test]
    fn pseudo_summary_preserves_document_order() {
        let d = doc(&["A", "B", "C"]);
        let p = build_pseudo_summary(&d, &selection(&[0, 2], &[2]), 256).unwrap();
        assert_eq!(p.text, "A C");
        assert_eq!(p.indices, [0, 2]);
        assert!(!p.truncated);
    }

    #[test]
    fn pseudo_summary_drops_trailing_sentences() {
        let long = vec!["w"; 60].join(" ");
        let d = doc(&[&long, &long, &long, &long, &long]);
        let p = build_pseudo_summary(&d, &selection(&[0, 1, 2, 3, 4], &[0]), 256).unwrap();
        assert_eq!(p.sentences.len(), 4);
        assert!(p.truncated);
        let big = vec!["w"; 300].join(" ");
        let p = build_pseudo_summary(&doc(&[&big]), &selection(&[0], &[0]), 256).unwrap();
        assert_eq!(p.sentences.len(), 1);
        assert!(p.truncated);
    }

    #[test]
    fn counting_rules() {
        assert_eq!(selection_count(10, 0.45), 5);
        assert_eq!(selection_count(1, 0.45), 1);
        assert_eq!(selection_count(3, 0.1), 1);
        assert_eq!(selection_count(4, 1.0), 4);
        assert_eq!(mask_count(5, 0.8), 4);
        assert_eq!(mask_count(1, 0.8), 1);
        assert_eq!(mask_count(3, 0.0), 1);
        assert_eq!(mask_count(2, 0.75), 2);
    }
}
