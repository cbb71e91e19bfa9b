use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Serialize;
use ureq::Agent;

use super::wire::{
    decode_noun_phrases, AnswerRequest, AnswerResponse, Endpoint, GenerateRequest, GenerateResponse, NounPhraseRequest,
    NounPhraseResponse,
};
use super::{BackendError, BackendSpec, NounPhrase, QaBackend};

/// Counting semaphore bounding concurrent requests.
struct Permits {
    free: Mutex<usize>,
    released: Condvar,
}

struct Permit<'a>(&'a Permits);

impl Permits {
    fn new(n: usize) -> Self {
        Permits {
            free: Mutex::new(n),
            released: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().expect("permit lock");
        while *free == 0 {
            free = self.released.wait(free).expect("permit lock");
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().expect("permit lock") += 1;
        self.0.released.notify_one();
    }
}

enum Attempt<T> {
    Done(T),
    Retry(String),
}

/// HTTP client for the model service.
///
/// 4xx responses fail immediately. 5xx responses and transport errors are
/// retried `max_retries` times with exponential backoff.
pub struct RemoteBackend {
    agent: Agent,
    base: String,
    max_retries: u32,
    backoff: Duration,
    permits: Permits,
}

impl RemoteBackend {
    pub fn new(spec: &BackendSpec) -> Result<Self, BackendError> {
        spec.validate()?;
        let base = spec
            .endpoint
            .as_deref()
            .ok_or_else(|| BackendError::Config("remote backend requires an endpoint".into()))?
            .trim_end_matches('/')
            .to_string();
        let agent: Agent = Agent::config_builder()
            .timeout_global(Some(spec.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(RemoteBackend {
            agent,
            base,
            max_retries: spec.max_retries,
            backoff: spec.backoff,
            permits: Permits::new(spec.max_in_flight),
        })
    }

    pub fn endpoint(&self) -> &str {
        &self.base
    }

    fn post<Req: Serialize, Resp: DeserializeOwned>(
        &self,
        endpoint: Endpoint,
        body: &Req,
    ) -> Result<Resp, BackendError> {
        let url = format!("{}{}", self.base, endpoint.path());
        let attempts = self.max_retries + 1;
        let mut last_error = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                let wait = self.backoff.saturating_mul(1 << (attempt - 1).min(16));
                log::debug!("retrying {url} in {wait:?} after: {last_error}");
                thread::sleep(wait);
            }
            match self.try_once(&url, body)? {
                Attempt::Done(resp) => return Ok(resp),
                Attempt::Retry(reason) => last_error = reason,
            }
        }
        Err(BackendError::Unavailable {
            endpoint: url,
            attempts,
            last_error,
        })
    }

    fn try_once<Req: Serialize, Resp: DeserializeOwned>(
        &self,
        url: &str,
        body: &Req,
    ) -> Result<Attempt<Resp>, BackendError> {
        let _permit = self.permits.acquire();
        let mut resp = match self.agent.post(url).send_json(body) {
            Ok(r) => r,
            Err(e) => return Ok(Attempt::Retry(e.to_string())),
        };
        let status = resp.status().as_u16();
        if status >= 500 {
            return Ok(Attempt::Retry(format!("status {status}")));
        }
        if status >= 400 {
            let body = resp.body_mut().read_to_string().unwrap_or_default();
            return Err(BackendError::Rejected { status, body });
        }
        match resp.body_mut().read_json::<Resp>() {
            Ok(parsed) => Ok(Attempt::Done(parsed)),
            Err(e) => Err(BackendError::InvalidResponse(format!("{url}: {e}"))),
        }
    }
}

impl QaBackend for RemoteBackend {
    fn generate(&self, req: &GenerateRequest) -> Result<String, BackendError> {
        self.post::<_, GenerateResponse>(Endpoint::Generate, req)
            .map(|r| r.question)
    }

    fn answer(&self, req: &AnswerRequest) -> Result<String, BackendError> {
        self.post::<_, AnswerResponse>(Endpoint::Answer, req).map(|r| r.answer)
    }

    fn noun_phrases(&self, sentence: &str) -> Result<Vec<NounPhrase>, BackendError> {
        let req = NounPhraseRequest {
            sentence: sentence.to_string(),
        };
        let resp: NounPhraseResponse = self.post(Endpoint::NounPhrases, &req)?;
        decode_noun_phrases(sentence, &resp)
    }
}
