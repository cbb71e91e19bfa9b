//! Rule-based question generation, answering and noun-phrase chunking.
//!
//! Quality is deliberately low. The point is a backend that is
//! deterministic, fast and hermetic so the whole pipeline can run without
//! a model service.

use std::collections::HashSet;
use std::ops::Range;

use super::wire::{AnswerRequest, GenerateRequest};
use super::{BackendError, NounPhrase, QaBackend};
use crate::corpus::segment_sentences;
use crate::text::{is_punctuation, squash_whitespace, token_spans};

/// Longest answer span returned by [`HeuristicBackend::answer`].
pub const MAX_ANSWER_TOKENS: usize = 8;

const AUXILIARIES: &[&str] = &[
    "am", "is", "are", "was", "were", "be", "been", "being", "has", "have", "had", "do", "does", "did", "will",
    "would", "shall", "should", "can", "could", "may", "might", "must", "said", "says", "made", "went", "goes", "took",
    "saw", "got", "gave", "came", "knew", "thought", "told", "felt", "left", "found", "became", "began", "kept", "ran",
    "sat", "stood", "wrote", "brought", "bought", "held", "met", "lost", "won", "led",
];

/// Words ending in "ed" that are not past-tense verbs.
const NOT_VERBS: &[&str] = &[
    "bed", "red", "need", "seed", "feed", "reed", "weed", "deed", "speed", "breed", "greed", "shed", "sled", "shred",
    "hundred", "indeed", "embed", "naked", "sacred", "wicked", "kindred", "rugged", "ragged", "wretched", "creed",
    "bleed", "proceed", "succeed", "exceed", "steed", "tweed", "bred", "fled",
];

const DETERMINERS: &[&str] = &[
    "the", "a", "an", "this", "that", "these", "those", "his", "her", "their", "its", "our", "my", "your", "some",
    "every", "each", "any", "no", "another",
];

/// Tokens that end a determiner-initiated noun phrase.
const PHRASE_BREAKERS: &[&str] = &[
    "of", "in", "on", "at", "by", "for", "with", "about", "to", "from", "into", "over", "under", "after", "before",
    "during", "through", "and", "or", "but", "nor", "so", "yet", "because", "while", "when", "where", "who", "whom",
    "whose", "which", "what", "that", "than", "as", "if", "not", "then", "there",
];

const PRONOUNS: &[&str] = &[
    "i", "you", "he", "she", "it", "we", "they", "me", "him", "us", "them", "this", "that",
];

/// Sentence-initial words lowercased inside a generated question.
const FUNCTION_WORDS: &[&str] = &[
    "the", "a", "an", "this", "that", "these", "those", "his", "her", "their", "its", "our", "my", "your", "some",
    "every", "each", "in", "on", "at", "by", "for", "with", "after", "before", "during", "when", "while", "if",
];

fn is_word(token: &str) -> bool {
    token.chars().all(char::is_alphabetic)
}

fn in_list(list: &[&str], token: &str) -> bool {
    list.contains(&token.to_lowercase().as_str())
}

fn is_past_tense(token: &str) -> bool {
    let lower = token.to_lowercase();
    is_word(token) && lower.len() >= 4 && lower.ends_with("ed") && !NOT_VERBS.contains(&lower.as_str())
}

fn is_verb(token: &str) -> bool {
    is_past_tense(token) || (is_word(token) && in_list(AUXILIARIES, token))
}

fn is_capitalized(token: &str) -> bool {
    token.chars().next().is_some_and(char::is_uppercase)
}

/// Deterministic, network-free backend.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeuristicBackend;

impl HeuristicBackend {
    /// Template question for one sentence: the leading run of non-verb
    /// tokens is taken as the subject.
    pub fn question_for(sentence: &str) -> String {
        let spans = token_spans(sentence);
        let verb_at = spans.iter().position(|r| is_verb(&sentence[r.clone()]));
        let subject_end = verb_at.unwrap_or(spans.len());
        let mut subject_tokens = &spans[..subject_end];
        while let Some(last) = subject_tokens.last() {
            if !is_punctuation(&sentence[last.clone()]) {
                break;
            }
            subject_tokens = &subject_tokens[..subject_tokens.len() - 1];
        }
        let (Some(first), Some(last)) = (subject_tokens.first(), subject_tokens.last()) else {
            return "What happened?".to_string();
        };
        let mut subject = sentence[first.start..last.end].to_string();
        let first_word = &sentence[first.clone()];
        if in_list(FUNCTION_WORDS, first_word) {
            subject.replace_range(..first_word.len(), &first_word.to_lowercase());
        }
        let subject = subject.split_whitespace().collect::<Vec<_>>().join(" ");
        match verb_at {
            Some(v) if is_past_tense(&sentence[spans[v].clone()]) => format!("What did {subject} do?"),
            _ => format!("What is true of {subject}?"),
        }
    }

    /// Span of at most [`MAX_ANSWER_TOKENS`] context tokens sharing the most
    /// words with the question. Ties prefer the longer, then the earlier
    /// span.
    pub fn answer_for(question: &str, context: &str) -> String {
        let spans = token_spans(context);
        if spans.is_empty() {
            return String::new();
        }
        let vocab: HashSet<String> = token_spans(question)
            .into_iter()
            .map(|r| question[r].to_lowercase())
            .filter(|t| !is_punctuation(t))
            .collect();
        let hits: Vec<usize> = spans
            .iter()
            .map(|r| usize::from(vocab.contains(&context[r.clone()].to_lowercase())))
            .collect();

        let mut best: (usize, usize, Range<usize>) = (0, 0, 0..0);
        for start in 0..spans.len() {
            let mut overlap = 0;
            for (end, hit) in hits.iter().enumerate().take(start + MAX_ANSWER_TOKENS).skip(start) {
                overlap += hit;
                let len = end - start + 1;
                if (overlap, len) > (best.0, best.1) {
                    best = (overlap, len, start..end + 1);
                }
            }
        }
        let range = best.2;
        context[spans[range.start].start..spans[range.end - 1].end].to_string()
    }

    /// Capitalized runs and determiner-initiated runs, left to right.
    pub fn phrases_in(sentence: &str) -> Vec<NounPhrase> {
        let spans = token_spans(sentence);
        let tok = |i: usize| &sentence[spans[i].clone()];
        let mut out = Vec::new();
        let mut i = 0;
        while i < spans.len() {
            let t = tok(i);
            let start = i;
            if is_word(t) && in_list(DETERMINERS, t) {
                let mut j = i + 1;
                while j < spans.len() {
                    let w = tok(j);
                    let after_pronoun = j > 0 && in_list(PRONOUNS, tok(j - 1)) && w.ends_with('s');
                    if !is_word(w)
                        || is_verb(w)
                        || after_pronoun
                        || in_list(PHRASE_BREAKERS, w)
                        || in_list(DETERMINERS, w)
                    {
                        break;
                    }
                    j += 1;
                }
                if j > i + 1 {
                    out.push(phrase(sentence, &spans[start..j]));
                }
                i = j.max(i + 1);
                continue;
            }
            let capital = is_word(t)
                && is_capitalized(t)
                && !is_verb(t)
                && !in_list(PRONOUNS, t)
                && !in_list(FUNCTION_WORDS, t)
                && !in_list(PHRASE_BREAKERS, t);
            if capital {
                let mut j = i + 1;
                while j < spans.len() && is_word(tok(j)) && is_capitalized(tok(j)) && !is_verb(tok(j)) {
                    j += 1;
                }
                out.push(phrase(sentence, &spans[start..j]));
                i = j;
                continue;
            }
            i += 1;
        }
        out
    }
}

/// Context sentences as (text, token spans), in order.
fn context_sentences(context: &str) -> Vec<(&str, Vec<Range<usize>>)> {
    segment_sentences(context)
        .unwrap_or_default()
        .into_iter()
        .map(|s| {
            let text = &context[s.start..s.end];
            (text, token_spans(text))
        })
        .collect()
}

fn lower_tokens(text: &str, spans: &[Range<usize>]) -> Vec<String> {
    spans.iter().map(|r| text[r.clone()].to_lowercase()).collect()
}

fn strip_terminal(text: &str) -> &str {
    text.trim_end_matches(|c: char| matches!(c, '.' | '!' | '?') || c.is_whitespace())
}

impl HeuristicBackend {
    /// Question for a short answer (a phrase, not a whole sentence) that
    /// occurs inside a context sentence: the answer, with a determiner in
    /// front of it, is replaced by "who" or "what". `None` when the answer
    /// is a whole sentence or does not occur on token boundaries.
    pub fn cloze_question(answer: &str, context: &str) -> Option<String> {
        let answer_spans = token_spans(answer);
        let needle = lower_tokens(answer, &answer_spans);
        if needle.is_empty() {
            return None;
        }
        for (sentence, spans) in context_sentences(context) {
            let tokens = lower_tokens(sentence, &spans);
            let content = tokens.iter().filter(|t| !is_punctuation(t)).count();
            if content <= needle.iter().filter(|t| !is_punctuation(t)).count() {
                continue;
            }
            let Some(at) = tokens.windows(needle.len()).position(|w| w == needle.as_slice()) else {
                continue;
            };
            let mut from = at;
            if from > 0 && DETERMINERS.contains(&tokens[from - 1].as_str()) {
                from -= 1;
            }
            let first = &answer[answer_spans[0].clone()];
            let who = needle.len() == 1 && is_capitalized(first) && !in_list(FUNCTION_WORDS, first);
            let wh = if who { "who" } else { "what" };
            let head = &sentence[..spans[from].start];
            let tail = strip_terminal(&sentence[spans[at + needle.len() - 1].end..]);
            let mut q = squash_whitespace(&format!("{head}{wh}{tail}"));
            if let Some(c) = q.chars().next() {
                q.replace_range(..c.len_utf8(), &c.to_uppercase().to_string());
            }
            return Some(format!("{q}?"));
        }
        None
    }

    /// Inverse of [`Self::cloze_question`]: aligns the words around the
    /// question's "who"/"what" with a context sentence and returns the gap,
    /// without a leading determiner.
    pub fn cloze_answer(question: &str, context: &str) -> Option<String> {
        let q_spans = token_spans(question);
        let mut q_tokens = lower_tokens(question, &q_spans);
        if q_tokens.last().is_some_and(|t| t == "?") {
            q_tokens.pop();
        }
        let wh = q_tokens.iter().position(|t| t == "who" || t == "what")?;
        let (prefix, suffix) = (&q_tokens[..wh], &q_tokens[wh + 1..]);
        for (sentence, spans) in context_sentences(context) {
            let mut tokens = lower_tokens(sentence, &spans);
            while tokens.last().is_some_and(|t| is_punctuation(t)) && suffix.last().is_none_or(|t| !is_punctuation(t)) {
                tokens.pop();
            }
            if tokens.len() < prefix.len() + suffix.len() + 1 || !tokens.starts_with(prefix) {
                continue;
            }
            let gap_end = tokens.len() - suffix.len();
            if tokens[gap_end..] != *suffix {
                continue;
            }
            let mut gap_start = prefix.len();
            if gap_end - gap_start > 1 && DETERMINERS.contains(&tokens[gap_start].as_str()) {
                gap_start += 1;
            }
            return Some(sentence[spans[gap_start].start..spans[gap_end - 1].end].to_string());
        }
        None
    }
}

fn phrase(sentence: &str, tokens: &[Range<usize>]) -> NounPhrase {
    let (start, end) = (tokens[0].start, tokens[tokens.len() - 1].end);
    NounPhrase {
        start,
        end,
        text: sentence[start..end].to_string(),
    }
}

impl QaBackend for HeuristicBackend {
    fn generate(&self, req: &GenerateRequest) -> Result<String, BackendError> {
        Ok(Self::cloze_question(&req.answer, &req.context).unwrap_or_else(|| Self::question_for(&req.answer)))
    }

    fn answer(&self, req: &AnswerRequest) -> Result<String, BackendError> {
        Ok(Self::cloze_answer(&req.question, &req.context)
            .unwrap_or_else(|| Self::answer_for(&req.question, &req.context)))
    }

    fn noun_phrases(&self, sentence: &str) -> Result<Vec<NounPhrase>, BackendError> {
        Ok(Self::phrases_in(sentence))
    }
}
