#![no_main]

use gapq::corpus::{segment_sentences, Document};
use gapq::text::{rouge_tokens, word_tokenize};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(spans) = segment_sentences(text) {
        let mut prev = 0;
        for s in &spans {
            assert!(prev <= s.start && s.start < s.end && s.end <= text.len());
            assert!(text.is_char_boundary(s.start) && text.is_char_boundary(s.end));
            prev = s.end;
        }
    }
    let _ = word_tokenize(text);
    let _ = rouge_tokens(text);
    if let Ok(doc) = Document::from_text("fuzz", text) {
        for s in doc.sentence_texts() {
            assert!(!s.is_empty());
        }
    }
});
