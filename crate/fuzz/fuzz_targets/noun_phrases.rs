#![no_main]

use gapq::qg::wire::{decode_noun_phrases, encode_noun_phrases, NounPhraseResponse};
use libfuzzer_sys::fuzz_target;

// Input: the sentence, a newline, then the service's JSON response.
fuzz_target!(|data: &str| {
    let Some((sentence, json)) = data.split_once('\n') else {
        return;
    };
    let Ok(response) = serde_json::from_str::<NounPhraseResponse>(json) else {
        return;
    };
    if let Ok(phrases) = decode_noun_phrases(sentence, &response) {
        for p in &phrases {
            assert!(sentence.is_char_boundary(p.start) && sentence.is_char_boundary(p.end));
        }
        let encoded = encode_noun_phrases(sentence, &phrases);
        assert_eq!(decode_noun_phrases(sentence, &encoded).expect("round trip"), phrases);
    }
});
