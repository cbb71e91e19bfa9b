//! Question generation, question answering and noun-phrase extraction
//! behind one interface, with three interchangeable backends:
//!
//! * `heuristic`: deterministic rule-based templates, no network;
//! * `recorded`: replays fixture or cache files, fails on a miss;
//! * `remote`: JSON-over-HTTP client for a model service, memoized in an
//!   on-disk response cache.

mod cache;
mod heuristic;
mod recorded;
mod remote;
pub mod wire;

use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{CachedBackend, ResponseCache};
pub use heuristic::HeuristicBackend;
pub use recorded::{FixtureLine, RecordedBackend};
pub use remote::RemoteBackend;
pub use wire::{AnswerRequest, Endpoint, GenerateRequest, NounPhraseRequest};

use crate::text::squash_whitespace;

/// Environment variable that overrides the remote endpoint.
pub const ENDPOINT_ENV: &str = "GAPQ_BACKEND_URL";

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("backend {endpoint} unavailable after {attempts} attempts: {last_error}")]
    Unavailable {
        endpoint: String,
        attempts: u32,
        last_error: String,
    },
    #[error("backend rejected request with status {status}: {body}")]
    Rejected { status: u16, body: String },
    #[error("no recorded response for {endpoint:?} request {key}")]
    FixtureMiss { endpoint: Endpoint, key: String },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("invalid backend response: {0}")]
    InvalidResponse(String),
    #[error("backend configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Input to question generation: one answer sentence and its context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QgRequest {
    pub context: String,
    pub answer_sentence: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub text: String,
    /// Index of the sentence this question asks about.
    pub source_index: usize,
}

/// A noun phrase inside a sentence. Offsets are byte offsets; `text`
/// equals the sentence slice up to letter case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NounPhrase {
    pub start: usize,
    pub end: usize,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Heuristic,
    Recorded,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendSpec {
    pub kind: BackendKind,
    /// Base URL of the model service (remote only).
    pub endpoint: Option<String>,
    /// Fixture or cache files replayed by the recorded backend.
    #[serde(default)]
    pub fixtures: Vec<PathBuf>,
    /// Response cache for the remote backend.
    pub cache: Option<PathBuf>,
    #[serde(with = "duration_secs")]
    pub timeout: Duration,
    pub max_retries: u32,
    #[serde(with = "duration_secs")]
    pub backoff: Duration,
    pub max_in_flight: usize,
}

mod duration_secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}

impl BackendSpec {
    pub fn heuristic() -> Self {
        BackendSpec {
            kind: BackendKind::Heuristic,
            endpoint: None,
            fixtures: Vec::new(),
            cache: None,
            timeout: Duration::from_secs(30),
            max_retries: 3,
            backoff: Duration::from_millis(200),
            max_in_flight: 8,
        }
    }

    pub fn recorded(fixtures: impl IntoIterator<Item = PathBuf>) -> Self {
        BackendSpec {
            kind: BackendKind::Recorded,
            fixtures: fixtures.into_iter().collect(),
            ..Self::heuristic()
        }
    }

    pub fn remote(endpoint: impl Into<String>) -> Self {
        BackendSpec {
            kind: BackendKind::Remote,
            endpoint: Some(endpoint.into()),
            ..Self::heuristic()
        }
    }

    /// Parses the command-line form: `heuristic`, `recorded`, or an
    /// `http://` URL.
    pub fn parse(value: &str) -> Result<Self, BackendError> {
        match value {
            "heuristic" => Ok(Self::heuristic()),
            "recorded" => Ok(Self::recorded([])),
            url if url.starts_with("http://") || url.starts_with("https://") => Ok(Self::remote(url)),
            other => Err(BackendError::Config(format!(
                "unknown backend {other:?}; expected heuristic, recorded or an http:// URL"
            ))),
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        match self.kind {
            BackendKind::Remote if self.endpoint.as_deref().is_none_or(str::is_empty) => {
                Err(BackendError::Config("remote backend requires an endpoint".into()))
            }
            _ if self.max_in_flight == 0 => Err(BackendError::Config("max_in_flight must be at least 1".into())),
            _ => Ok(()),
        }
    }
}

/// Operations every backend provides. Implementations must be shareable
/// across worker threads.
pub trait QaBackend: Send + Sync {
    /// Raw question text for an answer in context.
    fn generate(&self, req: &GenerateRequest) -> Result<String, BackendError>;
    fn answer(&self, req: &AnswerRequest) -> Result<String, BackendError>;
    fn noun_phrases(&self, sentence: &str) -> Result<Vec<NounPhrase>, BackendError>;
}

/// A backend built from a [`BackendSpec`].
pub enum Backend {
    Heuristic(HeuristicBackend),
    Recorded(RecordedBackend),
    Remote(CachedBackend<RemoteBackend>),
}

impl Backend {
    pub fn from_spec(spec: &BackendSpec) -> Result<Self, BackendError> {
        spec.validate()?;
        Ok(match spec.kind {
            BackendKind::Heuristic => Backend::Heuristic(HeuristicBackend),
            BackendKind::Recorded => Backend::Recorded(RecordedBackend::load(&spec.fixtures)?),
            BackendKind::Remote => {
                let cache = match &spec.cache {
                    Some(path) => ResponseCache::open(path)?,
                    None => ResponseCache::in_memory(),
                };
                Backend::Remote(CachedBackend::new(RemoteBackend::new(spec)?, cache))
            }
        })
    }
}

impl QaBackend for Backend {
    fn generate(&self, req: &GenerateRequest) -> Result<String, BackendError> {
        match self {
            Backend::Heuristic(b) => b.generate(req),
            Backend::Recorded(b) => b.generate(req),
            Backend::Remote(b) => b.generate(req),
        }
    }

    fn answer(&self, req: &AnswerRequest) -> Result<String, BackendError> {
        match self {
            Backend::Heuristic(b) => b.answer(req),
            Backend::Recorded(b) => b.answer(req),
            Backend::Remote(b) => b.answer(req),
        }
    }

    fn noun_phrases(&self, sentence: &str) -> Result<Vec<NounPhrase>, BackendError> {
        match self {
            Backend::Heuristic(b) => b.noun_phrases(sentence),
            Backend::Recorded(b) => b.noun_phrases(sentence),
            Backend::Remote(b) => b.noun_phrases(sentence),
        }
    }
}

/// Normalizes backend output into a one-line question ending in exactly
/// one `?`.
pub fn normalize_question(raw: &str) -> Option<String> {
    let squashed = squash_whitespace(raw);
    let body = squashed.trim_end_matches(|c: char| c == '?' || c.is_whitespace());
    if body.is_empty() {
        return None;
    }
    Some(format!("{body}?"))
}

pub fn generate_question(
    backend: &dyn QaBackend,
    req: &QgRequest,
    source_index: usize,
) -> Result<Question, BackendError> {
    if req.answer_sentence.trim().is_empty() {
        return Err(BackendError::InvalidRequest("answer sentence is empty".into()));
    }
    if !req.context.to_lowercase().contains(&req.answer_sentence.to_lowercase()) {
        log::warn!(
            "answer sentence does not occur in its context: {:?}",
            req.answer_sentence
        );
    }
    let raw = backend.generate(&GenerateRequest {
        context: req.context.clone(),
        answer: req.answer_sentence.clone(),
    })?;
    let text = normalize_question(&raw).ok_or_else(|| BackendError::InvalidResponse("empty question".into()))?;
    Ok(Question { text, source_index })
}

pub fn answer_question(backend: &dyn QaBackend, question: &str, context: &str) -> Result<String, BackendError> {
    if question.trim().is_empty() || context.trim().is_empty() {
        return Err(BackendError::InvalidRequest(
            "question and context must be non-empty".into(),
        ));
    }
    backend.answer(&AnswerRequest {
        context: context.to_string(),
        question: question.to_string(),
    })
}

pub fn extract_noun_phrases(backend: &dyn QaBackend, sentence: &str) -> Result<Vec<NounPhrase>, BackendError> {
    if sentence.trim().is_empty() {
        return Err(BackendError::InvalidRequest("sentence is empty".into()));
    }
    backend.noun_phrases(sentence)
}
