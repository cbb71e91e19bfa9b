use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use gapq::qg::wire::{AnswerRequest, GenerateRequest};
use gapq::qg::{
    generate_question, Backend, BackendError, BackendSpec, QaBackend, QgRequest, RemoteBackend, ResponseCache,
};
use serde_json::{json, Value};
use tiny_http::{Header, Response, Server};

/// Serves `handler(path, body) -> (status, body)` until `requests` have
/// been handled. Returns the base URL and a request counter.
fn stub<F>(requests: usize, handler: F) -> (String, Arc<AtomicUsize>)
where
    F: Fn(&str, Value) -> (u16, Value) + Send + 'static,
{
    let server = Server::http("127.0.0.1:0").unwrap();
    let url = format!("http://{}", server.server_addr().to_ip().unwrap());
    let count = Arc::new(AtomicUsize::new(0));
    let seen = Arc::clone(&count);
    thread::spawn(move || {
        for _ in 0..requests {
            let Ok(mut req) = server.recv() else { return };
            seen.fetch_add(1, Ordering::SeqCst);
            let mut body = String::new();
            req.as_reader().read_to_string(&mut body).unwrap();
            let parsed: Value = serde_json::from_str(&body).unwrap_or(Value::Null);
            let (status, out) = handler(req.url(), parsed);
            let header = Header::from_bytes("Content-Type", "application/json").unwrap();
            let resp = Response::from_string(out.to_string())
                .with_status_code(status)
                .with_header(header);
            let _ = req.respond(resp);
        }
    });
    (url, count)
}

fn spec(url: &str, retries: u32) -> BackendSpec {
    BackendSpec {
        max_retries: retries,
        backoff: Duration::from_millis(5),
        timeout: Duration::from_secs(5),
        ..BackendSpec::remote(url)
    }
}

fn gen_req() -> GenerateRequest {
    GenerateRequest {
        context: "Sarah used the Socratic method.".into(),
        answer: "Sarah used the Socratic method.".into(),
    }
}

#[test]
fn speaks_the_three_endpoints() {
    let (url, _) = stub(3, |path, body| match path {
        "/v1/generate" => {
            assert_eq!(body["answer"], "Sarah used the Socratic method.");
            (200, json!({"question": "How did Sarah use the Socratic method"}))
        }
        "/v1/answer" => {
            assert_eq!(body["question"], "Who used it?");
            (200, json!({"answer": "Sarah"}))
        }
        "/v1/nounphrases" => (
            200,
            json!({"spans": [{"start": 0, "end": 5, "text": "Sarah"}, {"start": 11, "end": 30, "text": "the Socratic method"}]}),
        ),
        _ => (404, json!({})),
    });
    let backend = RemoteBackend::new(&spec(&url, 0)).unwrap();
    let q = generate_question(
        &backend,
        &QgRequest {
            context: gen_req().context,
            answer_sentence: gen_req().answer,
        },
        3,
    )
    .unwrap();
    assert_eq!(q.text, "How did Sarah use the Socratic method?");
    assert_eq!(q.source_index, 3);
    let a = backend
        .answer(&AnswerRequest {
            context: "ctx".into(),
            question: "Who used it?".into(),
        })
        .unwrap();
    assert_eq!(a, "Sarah");
    let nps = backend.noun_phrases("Sarah used the Socratic method").unwrap();
    let texts: Vec<_> = nps.iter().map(|n| n.text.as_str()).collect();
    assert_eq!(texts, ["Sarah", "the Socratic method"]);
}

#[test]
fn server_errors_are_retried_then_succeed() {
    let calls = Arc::new(AtomicUsize::new(0));
    let c = Arc::clone(&calls);
    let (url, count) = stub(3, move |_, _| {
        if c.fetch_add(1, Ordering::SeqCst) < 2 {
            (503, json!({"error": "busy"}))
        } else {
            (200, json!({"question": "Why?"}))
        }
    });
    let backend = RemoteBackend::new(&spec(&url, 3)).unwrap();
    assert_eq!(backend.generate(&gen_req()).unwrap(), "Why?");
    assert_eq!(count.load(Ordering::SeqCst), 3);
}

#[test]
fn persistent_server_errors_make_the_backend_unavailable() {
    let (url, count) = stub(3, |_, _| (500, json!({})));
    let backend = RemoteBackend::new(&spec(&url, 2)).unwrap();
    let err = backend.generate(&gen_req()).unwrap_err();
    assert!(matches!(err, BackendError::Unavailable { attempts: 3, .. }), "{err}");
    assert_eq!(count.load(Ordering::SeqCst), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let (url, count) = stub(1, |_, _| (400, json!({"error": "missing field"})));
    let backend = RemoteBackend::new(&spec(&url, 5)).unwrap();
    match backend.generate(&gen_req()) {
        Err(BackendError::Rejected { status, body }) => {
            assert_eq!(status, 400);
            assert!(body.contains("missing field"));
        }
        other => panic!("expected rejection, got {other:?}"),
    }
    thread::sleep(Duration::from_millis(50));
    assert_eq!(count.load(Ordering::SeqCst), 1);
}

#[test]
fn unreachable_endpoint_is_unavailable() {
    // Bind and drop to get a port nothing listens on.
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let backend = RemoteBackend::new(&spec(&format!("http://127.0.0.1:{port}"), 1)).unwrap();
    let err = backend.generate(&gen_req()).unwrap_err();
    assert!(matches!(err, BackendError::Unavailable { attempts: 2, .. }), "{err}");
}

#[test]
fn malformed_success_body_is_invalid() {
    let (url, _) = stub(1, |_, _| {
        (200, json!({"spans": [{"start": 0, "end": 99, "text": "x"}]}))
    });
    let backend = RemoteBackend::new(&spec(&url, 0)).unwrap();
    assert!(matches!(
        backend.noun_phrases("short"),
        Err(BackendError::InvalidResponse(_))
    ));
}

#[test]
fn cached_remote_backend_asks_once() {
    let (url, count) = stub(1, |_, _| (200, json!({"question": "Who?"})));
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("responses.jsonl");
    let mut s = spec(&url, 0);
    s.cache = Some(cache.clone());
    let backend = Backend::from_spec(&s).unwrap();
    for _ in 0..3 {
        assert_eq!(backend.generate(&gen_req()).unwrap(), "Who?");
    }
    assert_eq!(count.load(Ordering::SeqCst), 1);
    assert_eq!(ResponseCache::open(&cache).unwrap().len(), 1);
}
