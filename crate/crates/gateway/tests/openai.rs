//! OpenAiProvider against a local fake chat-completions server.

use std::convert::Infallible;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::response::sse::{Event, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::{Json, Router};
use futures::{stream, StreamExt};
use gesturetext_gateway::provider::{OpenAiProvider, Provider, ProviderError, ProviderRequest};
use gesturetext_gateway::relay::Relay;
use serde_json::{json, Value};

#[derive(Clone, Default)]
struct Fake {
    mode: &'static str,
    seen_auth: Arc<std::sync::Mutex<Option<String>>>,
    seen_body: Arc<std::sync::Mutex<Option<Value>>>,
    dropped: Arc<AtomicBool>,
    sent: Arc<AtomicUsize>,
}

struct DropFlag(Arc<AtomicBool>);
impl Drop for DropFlag {
    fn drop(&mut self) {
        self.0.store(true, Ordering::SeqCst);
    }
}

fn chunk(content: &str) -> String {
    json!({"object": "chat.completion.chunk", "choices": [{"index": 0, "delta": {"content": content}, "finish_reason": null}]})
        .to_string()
}

async fn completions(State(fake): State<Fake>, headers: HeaderMap, Json(body): Json<Value>) -> Response {
    *fake.seen_auth.lock().unwrap() = headers.get("authorization").map(|v| v.to_str().unwrap().to_string());
    *fake.seen_body.lock().unwrap() = Some(body);
    match fake.mode {
        "status" => (StatusCode::UNAUTHORIZED, "bad key").into_response(),
        "ok" => {
            let mut events = vec![json!({"choices": [{"index": 0, "delta": {"role": "assistant"}}]}).to_string()];
            events.extend(["Über", " die", " Brücke."].map(chunk));
            events.push("[DONE]".into());
            events.push(chunk("never"));
            Sse::new(stream::iter(events.into_iter().map(|e| Ok::<_, Infallible>(Event::default().data(e))))).into_response()
        }
        "error" => {
            let events = vec![chunk("Partial"), json!({"error": {"message": "overloaded"}}).to_string()];
            Sse::new(stream::iter(events.into_iter().map(|e| Ok::<_, Infallible>(Event::default().data(e))))).into_response()
        }
        _ => {
            // endless slow stream that records when the client hangs up
            let guard = Arc::new(DropFlag(fake.dropped.clone()));
            let sent = fake.sent.clone();
            let s = stream::unfold(guard, move |g| {
                let sent = sent.clone();
                async move {
                    tokio::time::sleep(Duration::from_millis(20)).await;
                    sent.fetch_add(1, Ordering::SeqCst);
                    Some((Ok::<_, Infallible>(Event::default().data(chunk("tick "))), g))
                }
            });
            Sse::new(s).into_response()
        }
    }
}

async fn start(mode: &'static str) -> (String, Fake) {
    let fake = Fake { mode, ..Fake::default() };
    let app = Router::new().route("/v1/chat/completions", post(completions)).with_state(fake.clone());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    (format!("http://{addr}/v1/"), fake)
}

fn req() -> ProviderRequest {
    ProviderRequest { request_id: 1, system: "SYS".into(), user: "USER".into(), max_sentences: None }
}

#[tokio::test]
async fn streams_deltas_until_done() {
    let (url, fake) = start("ok").await;
    let p = OpenAiProvider::new(url, Some("sk-test".into()), "gpt-4o-mini");
    let got: Vec<_> = p.stream(req()).collect().await;
    assert_eq!(got, vec![Ok("Über".to_string()), Ok(" die".to_string()), Ok(" Brücke.".to_string())]);
    assert_eq!(fake.seen_auth.lock().unwrap().as_deref(), Some("Bearer sk-test"));
    let body = fake.seen_body.lock().unwrap().clone().unwrap();
    assert_eq!(body["model"], "gpt-4o-mini");
    assert_eq!(body["stream"], true);
    assert_eq!(body["messages"][0], json!({"role": "system", "content": "SYS"}));
    assert_eq!(body["messages"][1], json!({"role": "user", "content": "USER"}));
}

#[tokio::test]
async fn http_error_status() {
    let (url, _) = start("status").await;
    let got: Vec<_> = OpenAiProvider::new(url, None, "m").stream(req()).collect().await;
    assert_eq!(got, vec![Err(ProviderError::Status { status: 401, body: "bad key".into() })]);
}

#[tokio::test]
async fn error_event_mid_stream() {
    let (url, _) = start("error").await;
    let relay = Relay::new(Arc::new(OpenAiProvider::new(url, None, "m")));
    let got: Vec<_> = relay.start(req()).unwrap().collect().await;
    assert_eq!(got.len(), 2);
    assert_eq!(got[0].delta, "Partial");
    assert!(got[1].done);
    assert_eq!(got[1].error.as_deref(), Some("provider error: overloaded"));
}

#[tokio::test]
async fn cancel_aborts_upstream_request() {
    let (url, fake) = start("endless").await;
    let relay = Relay::new(Arc::new(OpenAiProvider::new(url, None, "m")));
    let mut s = relay.start(req()).unwrap();
    assert_eq!(s.next().await.unwrap().delta, "tick ");
    assert!(relay.cancel(1));
    for _ in 0..100 {
        if fake.dropped.load(Ordering::SeqCst) {
            let sent = fake.sent.load(Ordering::SeqCst);
            tokio::time::sleep(Duration::from_millis(100)).await;
            assert_eq!(fake.sent.load(Ordering::SeqCst), sent);
            return;
        }
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
    panic!("upstream stream was never dropped");
}

#[tokio::test]
async fn unreachable_provider() {
    let got: Vec<_> = OpenAiProvider::new("http://127.0.0.1:1/v1", None, "m").stream(req()).collect().await;
    assert!(matches!(got.as_slice(), [Err(ProviderError::Request(_))]));
}
