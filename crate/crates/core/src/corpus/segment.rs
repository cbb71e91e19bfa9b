use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::text::token_count;

/// Words whose trailing period never ends a sentence. Compared lowercased,
/// without the final period.
pub const ABBREVIATIONS: [&str; 9] = ["mr", "mrs", "dr", "prof", "st", "vs", "etc", "e.g", "i.e"];

/// Byte range of one sentence inside its text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceSpan {
    pub start: usize,
    pub end: usize,
    pub token_count: usize,
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closing(c: char) -> bool {
    matches!(c, '"' | '\'' | '\u{201d}' | '\u{2019}' | ')' | ']')
}

fn is_opening_quote(c: char) -> bool {
    matches!(c, '"' | '\'' | '\u{201c}' | '\u{2018}')
}

fn preceded_by_abbreviation(text: &str, period: usize) -> bool {
    let head = &text[..period];
    let word_start = head
        .char_indices()
        .rev()
        .take_while(|&(_, c)| c.is_alphabetic() || c == '.')
        .last()
        .map_or(period, |(i, _)| i);
    let word = head[word_start..].trim_start_matches('.').to_lowercase();
    ABBREVIATIONS.contains(&word.as_str())
}

/// Splits `text` into sentences.
///
/// A sentence ends at `.`, `!` or `?` (plus any run of further terminals and
/// closing quotes or brackets) when followed by whitespace and then an
/// uppercase letter or an opening quote, unless the period closes one of
/// [`ABBREVIATIONS`]. A blank line always ends a sentence, and so does the
/// end of the text.
pub fn segment_sentences(text: &str) -> Result<Vec<SentenceSpan>, CorpusError> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    let mut last_end = 0;
    let push = |spans: &mut Vec<SentenceSpan>, s: usize, e: usize| {
        spans.push(SentenceSpan {
            start: s,
            end: e,
            token_count: token_count(&text[s..e]),
        })
    };

    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            if c == '\n' {
                let mut j = i + 1;
                let mut newlines = 1;
                while j < chars.len() && chars[j].1.is_whitespace() {
                    if chars[j].1 == '\n' {
                        newlines += 1;
                    }
                    j += 1;
                }
                if newlines >= 2 {
                    if let Some(s) = start.take() {
                        push(&mut spans, s, last_end);
                    }
                }
                i = j;
                continue;
            }
            i += 1;
            continue;
        }
        if start.is_none() {
            start = Some(pos);
        }
        last_end = pos + c.len_utf8();
        if !is_terminal(c) {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < chars.len() && (is_terminal(chars[j].1) || is_closing(chars[j].1)) {
            j += 1;
        }
        let end = chars.get(j).map_or(text.len(), |&(p, _)| p);
        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() {
            k += 1;
        }
        let boundary = if k == j {
            // no whitespace after the terminal run
            false
        } else if k == chars.len() {
            true
        } else {
            let next = chars[k].1;
            let starts_new = next.is_uppercase() || is_opening_quote(next);
            starts_new && !(c == '.' && j == i + 1 && preceded_by_abbreviation(text, pos))
        };
        last_end = end;
        if boundary {
            push(&mut spans, start.take().unwrap_or(pos), end);
        }
        i = j;
    }
    if let Some(s) = start {
        push(&mut spans, s, last_end);
    }
    if spans.is_empty() {
        return Err(CorpusError::EmptyDocument);
    }
    Ok(spans)
}
