use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::wire::{
    decode_noun_phrases, encode_noun_phrases, request_hash, AnswerRequest, AnswerResponse, Endpoint, GenerateRequest,
    GenerateResponse, NounPhraseRequest, NounPhraseResponse,
};
use super::{BackendError, NounPhrase, QaBackend};

#[derive(Serialize)]
struct CacheLine<'a> {
    request_hash: &'a str,
    response: &'a Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CacheLineOwned {
    request_hash: String,
    response: Value,
}

/// Wire responses keyed by request hash, optionally persisted as JSONL.
///
/// Safe to share between threads. The first response stored for a key wins
/// and is what every later lookup sees.
#[derive(Debug, Default)]
pub struct ResponseCache {
    entries: RwLock<HashMap<String, Value>>,
    sink: Option<Mutex<File>>,
    path: Option<PathBuf>,
}

impl ResponseCache {
    pub fn in_memory() -> Self {
        ResponseCache::default()
    }

    /// Loads `path` if it exists and appends new entries to it.
    pub fn open(path: &Path) -> Result<Self, BackendError> {
        let mut entries = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(path)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let parsed: CacheLineOwned = serde_json::from_str(&line).map_err(|e| {
                    BackendError::InvalidResponse(format!("cache {} line {}: {e}", path.display(), i + 1))
                })?;
                entries.entry(parsed.request_hash).or_insert(parsed.response);
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(ResponseCache {
            entries: RwLock::new(entries),
            sink: Some(Mutex::new(file)),
            path: Some(path.to_path_buf()),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &str) -> Option<Value> {
        self.entries.read().expect("cache lock").get(key).cloned()
    }

    /// Returns the cached value for `key`, computing and storing it on a
    /// miss. `compute` runs without holding the lock, so two threads may
    /// race on the same key; only the first insert is kept.
    pub fn get_or_insert_with<F>(&self, key: &str, compute: F) -> Result<Value, BackendError>
    where
        F: FnOnce() -> Result<Value, BackendError>,
    {
        if let Some(v) = self.get(key) {
            return Ok(v);
        }
        let value = compute()?;
        let mut entries = self.entries.write().expect("cache lock");
        if let Some(existing) = entries.get(key) {
            return Ok(existing.clone());
        }
        if let Some(sink) = &self.sink {
            let line = serde_json::to_string(&CacheLine {
                request_hash: key,
                response: &value,
            })
            .expect("cache line serializes");
            let mut file = sink.lock().expect("cache file lock");
            writeln!(file, "{line}")?;
        }
        entries.insert(key.to_string(), value.clone());
        Ok(value)
    }
}

/// Memoizes another backend's responses in a [`ResponseCache`].
pub struct CachedBackend<B> {
    inner: B,
    cache: ResponseCache,
}

impl<B: QaBackend> CachedBackend<B> {
    pub fn new(inner: B, cache: ResponseCache) -> Self {
        CachedBackend { inner, cache }
    }

    pub fn cache(&self) -> &ResponseCache {
        &self.cache
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }

    fn cached<Req, Resp>(
        &self,
        endpoint: Endpoint,
        req: &Req,
        fetch: impl FnOnce() -> Result<Resp, BackendError>,
    ) -> Result<Resp, BackendError>
    where
        Req: Serialize,
        Resp: Serialize + for<'de> Deserialize<'de>,
    {
        let key = request_hash(endpoint, req);
        let value = self.cache.get_or_insert_with(&key, || {
            let resp = fetch()?;
            Ok(serde_json::to_value(resp).expect("response serializes"))
        })?;
        serde_json::from_value(value)
            .map_err(|e| BackendError::InvalidResponse(format!("cached {endpoint:?} response: {e}")))
    }
}

impl<B: QaBackend> QaBackend for CachedBackend<B> {
    fn generate(&self, req: &GenerateRequest) -> Result<String, BackendError> {
        self.cached(Endpoint::Generate, req, || {
            self.inner.generate(req).map(|question| GenerateResponse { question })
        })
        .map(|r: GenerateResponse| r.question)
    }

    fn answer(&self, req: &AnswerRequest) -> Result<String, BackendError> {
        self.cached(Endpoint::Answer, req, || {
            self.inner.answer(req).map(|answer| AnswerResponse { answer })
        })
        .map(|r: AnswerResponse| r.answer)
    }

    fn noun_phrases(&self, sentence: &str) -> Result<Vec<NounPhrase>, BackendError> {
        let req = NounPhraseRequest {
            sentence: sentence.to_string(),
        };
        let resp: NounPhraseResponse = self.cached(Endpoint::NounPhrases, &req, || {
            self.inner
                .noun_phrases(sentence)
                .map(|nps| encode_noun_phrases(sentence, &nps))
        })?;
        decode_noun_phrases(sentence, &resp)
    }
}
