//! JSON bodies of the model-service protocol and request hashing.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{BackendError, NounPhrase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Generate,
    Answer,
    NounPhrases,
}

impl Endpoint {
    pub fn path(self) -> &'static str {
        match self {
            Endpoint::Generate => "/v1/generate",
            Endpoint::Answer => "/v1/answer",
            Endpoint::NounPhrases => "/v1/nounphrases",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerateRequest {
    pub context: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerateResponse {
    pub question: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerRequest {
    pub context: String,
    pub question: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerResponse {
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NounPhraseRequest {
    pub sentence: String,
}

/// Character offsets into the request sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireSpan {
    pub start: usize,
    pub end: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NounPhraseResponse {
    pub spans: Vec<WireSpan>,
}

/// Stable key for a request: SHA-256 over the endpoint path, a newline and
/// the request's compact JSON with object keys sorted, hex encoded.
pub fn request_hash<T: Serialize>(endpoint: Endpoint, body: &T) -> String {
    // Going through Value sorts keys, so typed requests and hand-written
    // fixture objects hash alike.
    let canonical = serde_json::to_value(body).expect("request serializes");
    let mut hasher = Sha256::new();
    hasher.update(endpoint.path().as_bytes());
    hasher.update(b"\n");
    hasher.update(serde_json::to_vec(&canonical).expect("request serializes"));
    hex::encode(hasher.finalize())
}

/// Converts service spans (character offsets) into byte-offset noun
/// phrases, checking order, bounds and that each `text` matches the
/// sentence at its offsets (ignoring case).
pub fn decode_noun_phrases(sentence: &str, response: &NounPhraseResponse) -> Result<Vec<NounPhrase>, BackendError> {
    let mut boundaries: Vec<usize> = sentence.char_indices().map(|(i, _)| i).collect();
    boundaries.push(sentence.len());
    let char_len = boundaries.len() - 1;
    let invalid = |msg: String| BackendError::InvalidResponse(msg);

    let mut out = Vec::with_capacity(response.spans.len());
    let mut prev_end = 0;
    for span in &response.spans {
        if span.start >= span.end || span.end > char_len {
            return Err(invalid(format!(
                "span {}..{} outside sentence of {char_len} characters",
                span.start, span.end
            )));
        }
        if span.start < prev_end {
            return Err(invalid(format!(
                "span {}..{} overlaps or is out of order",
                span.start, span.end
            )));
        }
        let (start, end) = (boundaries[span.start], boundaries[span.end]);
        if sentence[start..end].to_lowercase() != span.text.to_lowercase() {
            return Err(invalid(format!(
                "span text {:?} does not match sentence text {:?}",
                span.text,
                &sentence[start..end]
            )));
        }
        out.push(NounPhrase {
            start,
            end,
            text: span.text.clone(),
        });
        prev_end = span.end;
    }
    Ok(out)
}

/// Inverse of [`decode_noun_phrases`].
pub fn encode_noun_phrases(sentence: &str, phrases: &[NounPhrase]) -> NounPhraseResponse {
    let char_offset = |byte: usize| sentence[..byte].chars().count();
    NounPhraseResponse {
        spans: phrases
            .iter()
            .map(|p| WireSpan {
                start: char_offset(p.start),
                end: char_offset(p.end),
                text: p.text.clone(),
            })
            .collect(),
    }
}
