//! Word-level tokenization shared by budgets, ROUGE and length statistics.
//!
//! A word token is a maximal run of alphanumeric characters. Every other
//! non-whitespace character is a token of its own, so `don't` becomes
//! `don`, `'`, `t`. The literal special tokens (`<mask>`, mode tokens and
//! `<qsep>`) are kept whole so that a mode prefix costs exactly one token.

use std::ops::Range;

/// Sentinel that replaces each masked sentence.
pub const MASK_TOKEN: &str = "<mask>";
pub const ASK_TOKEN: &str = "<ask>";
pub const ANSWER_TOKEN: &str = "<answer>";
pub const ASK_ANSWER_TOKEN: &str = "<ask&answer>";
/// Separates the question block from the pseudo-summary in targets.
pub const QSEP_TOKEN: &str = "<qsep>";

pub const SPECIAL_TOKENS: [&str; 5] = [MASK_TOKEN, ASK_TOKEN, ANSWER_TOKEN, ASK_ANSWER_TOKEN, QSEP_TOKEN];

/// Byte ranges of every token in `text`, in order.
pub fn token_spans(text: &str) -> Vec<Range<usize>> {
    let mut spans = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((start, c)) = chars.next() {
        if c.is_whitespace() {
            continue;
        }
        if c == '<' {
            if let Some(special) = SPECIAL_TOKENS.iter().find(|t| text[start..].starts_with(*t)) {
                let end = start + special.len();
                while chars.peek().is_some_and(|&(i, _)| i < end) {
                    chars.next();
                }
                spans.push(start..end);
                continue;
            }
        }
        if c.is_alphanumeric() {
            let mut end = start + c.len_utf8();
            while let Some(&(i, next)) = chars.peek() {
                if !next.is_alphanumeric() {
                    break;
                }
                end = i + next.len_utf8();
                chars.next();
            }
            spans.push(start..end);
        } else {
            spans.push(start..start + c.len_utf8());
        }
    }
    spans
}

/// Lowercased word tokens.
pub fn word_tokenize(text: &str) -> Vec<String> {
    token_spans(text).into_iter().map(|r| text[r].to_lowercase()).collect()
}

pub fn token_count(text: &str) -> usize {
    token_spans(text).len()
}

/// True for tokens made only of punctuation or symbols.
pub fn is_punctuation(token: &str) -> bool {
    !token.chars().any(char::is_alphanumeric)
}

/// Tokens used for ROUGE and overlap statistics: lowercased, punctuation-only
/// tokens dropped.
pub fn rouge_tokens(text: &str) -> Vec<String> {
    word_tokenize(text).into_iter().filter(|t| !is_punctuation(t)).collect()
}

/// Number of words, i.e. tokens that contain at least one alphanumeric
/// character. Separators such as `|` and the trailing `?` of a question do
/// not count.
pub fn word_count(text: &str) -> usize {
    token_spans(text)
        .into_iter()
        .filter(|r| !is_punctuation(&text[r.clone()]))
        .count()
}

/// Cuts `text` after its first `max_tokens` tokens. Returns the kept prefix
/// (without trailing whitespace) and whether anything was removed.
pub fn truncate_tokens(text: &str, max_tokens: usize) -> (&str, bool) {
    let spans = token_spans(text);
    if spans.len() <= max_tokens {
        return (text, false);
    }
    if max_tokens == 0 {
        return ("", true);
    }
    (&text[..spans[max_tokens - 1].end], true)
}

/// Collapses all whitespace runs (including newlines) into single spaces.
pub fn squash_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_terminal_punctuation() {
        assert_eq!(word_tokenize("The cat sat."), ["the", "cat", "sat", "."]);
    }

    #[test]
    fn empty_text_has_no_tokens() {
        assert!(word_tokenize("").is_empty());
        assert!(word_tokenize(" \n\t").is_empty());
    }

    #[test]
    fn contraction_splits_on_apostrophe() {
        assert_eq!(word_tokenize("don't"), ["don", "'", "t"]);
    }

    #[test]
    fn special_tokens_are_atomic() {
        assert_eq!(
            word_tokenize("<ask&answer> A <mask> b <qsep> c"),
            ["<ask&answer>", "a", "<mask>", "b", "<qsep>", "c"]
        );
        // a lone angle bracket is ordinary punctuation
        assert_eq!(word_tokenize("a < b"), ["a", "<", "b"]);
    }

    #[test]
    fn word_count_ignores_separators() {
        assert_eq!(word_count("Group discussion | Sarah || studies"), 4);
        assert_eq!(word_count("Who used it? Sarah"), 4);
    }

    #[test]
    fn truncation_keeps_whole_tokens() {
        assert_eq!(truncate_tokens("a b, c d", 3), ("a b,", true));
        assert_eq!(truncate_tokens("a b", 5), ("a b", false));
        assert_eq!(truncate_tokens("a b", 0), ("", true));
    }

    #[test]
    fn multibyte_words() {
        assert_eq!(
            word_tokenize("Café über\u{2014}naïve"),
            ["café", "über", "\u{2014}", "naïve"]
        );
    }
}
