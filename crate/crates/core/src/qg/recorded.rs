use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::wire::{
    decode_noun_phrases, request_hash, AnswerRequest, AnswerResponse, Endpoint, GenerateRequest, GenerateResponse,
    NounPhraseRequest, NounPhraseResponse,
};
use super::{BackendError, NounPhrase, QaBackend};

/// One line of a fixture or cache file.
///
/// Fixtures are written by hand and name the endpoint and the full
/// request; cache files only keep the request hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum FixtureLine {
    Request {
        endpoint: Endpoint,
        request: Value,
        response: Value,
    },
    Hashed {
        request_hash: String,
        response: Value,
    },
}

impl FixtureLine {
    pub fn parse(line: &str, line_no: usize) -> Result<Self, BackendError> {
        serde_json::from_str(line).map_err(|e| BackendError::InvalidResponse(format!("fixture line {line_no}: {e}")))
    }

    pub fn request<Q: Serialize, R: Serialize>(endpoint: Endpoint, request: &Q, response: &R) -> Self {
        FixtureLine::Request {
            endpoint,
            request: serde_json::to_value(request).expect("request serializes"),
            response: serde_json::to_value(response).expect("response serializes"),
        }
    }

    pub fn key(&self) -> String {
        match self {
            FixtureLine::Request { endpoint, request, .. } => request_hash(*endpoint, request),
            FixtureLine::Hashed { request_hash, .. } => request_hash.clone(),
        }
    }

    pub fn response(&self) -> &Value {
        match self {
            FixtureLine::Request { response, .. } | FixtureLine::Hashed { response, .. } => response,
        }
    }
}

/// Replays recorded responses. Any request without a recording fails with
/// [`BackendError::FixtureMiss`].
#[derive(Debug, Default, Clone)]
pub struct RecordedBackend {
    responses: HashMap<String, Value>,
}

impl RecordedBackend {
    pub fn load<P: AsRef<Path>>(paths: &[P]) -> Result<Self, BackendError> {
        let mut backend = RecordedBackend::default();
        for path in paths {
            let path = path.as_ref();
            let file = File::open(path)
                .map_err(|e| BackendError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                backend.insert(FixtureLine::parse(&line, i + 1)?);
            }
        }
        Ok(backend)
    }

    /// Later recordings of the same request replace earlier ones.
    pub fn insert(&mut self, line: FixtureLine) {
        let key = line.key();
        let response = match line {
            FixtureLine::Request { response, .. } | FixtureLine::Hashed { response, .. } => response,
        };
        self.responses.insert(key, response);
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    fn lookup<Req: Serialize, Resp: for<'de> Deserialize<'de>>(
        &self,
        endpoint: Endpoint,
        req: &Req,
    ) -> Result<Resp, BackendError> {
        let key = request_hash(endpoint, req);
        let value = self
            .responses
            .get(&key)
            .ok_or(BackendError::FixtureMiss { endpoint, key })?;
        serde_json::from_value(value.clone())
            .map_err(|e| BackendError::InvalidResponse(format!("recorded {endpoint:?} response: {e}")))
    }
}

impl QaBackend for RecordedBackend {
    fn generate(&self, req: &GenerateRequest) -> Result<String, BackendError> {
        self.lookup::<_, GenerateResponse>(Endpoint::Generate, req)
            .map(|r| r.question)
    }

    fn answer(&self, req: &AnswerRequest) -> Result<String, BackendError> {
        self.lookup::<_, AnswerResponse>(Endpoint::Answer, req)
            .map(|r| r.answer)
    }

    fn noun_phrases(&self, sentence: &str) -> Result<Vec<NounPhrase>, BackendError> {
        let req = NounPhraseRequest {
            sentence: sentence.to_string(),
        };
        let resp: NounPhraseResponse = self.lookup(Endpoint::NounPhrases, &req)?;
        decode_noun_phrases(sentence, &resp)
    }
}
