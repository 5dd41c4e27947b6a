//! Per-request relay from a provider stream to one client, with a registry
//! that rejects duplicate ids and supports cancellation.

use std::collections::HashMap;
use std::pin::Pin;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::task::{Context, Poll};

use futures::{Stream, StreamExt};
use serde::{Deserialize, Serialize};
use tokio::sync::mpsc;
use tokio_util::sync::CancellationToken;

use crate::provider::{Provider, ProviderRequest};

pub const CANCELLED: &str = "cancelled";

/// One chunk on the wire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WireChunk {
    pub request_id: u64,
    pub delta: String,
    pub done: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl WireChunk {
    fn delta(request_id: u64, delta: String) -> Self {
        Self { request_id, delta, done: false, error: None }
    }

    fn end(request_id: u64, error: Option<String>) -> Self {
        Self { request_id, delta: String::new(), done: true, error }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RelayError {
    #[error("request {0} already has an active stream")]
    Duplicate(u64),
}

/// Active streams by request id, tagged with a start serial so a finished
/// task never removes a newer stream that reused its id.
type Registry = Arc<Mutex<HashMap<u64, (u64, CancellationToken)>>>;

#[derive(Clone)]
pub struct Relay {
    provider: Arc<dyn Provider>,
    active: Registry,
    serial: Arc<AtomicU64>,
}

impl Relay {
    pub fn new(provider: Arc<dyn Provider>) -> Self {
        Self { provider, active: Arc::default(), serial: Arc::default() }
    }

    pub fn provider(&self) -> &Arc<dyn Provider> {
        &self.provider
    }

    pub fn active(&self) -> usize {
        self.active.lock().unwrap().len()
    }

    pub fn is_active(&self, request_id: u64) -> bool {
        self.active.lock().unwrap().contains_key(&request_id)
    }

    /// Starts relaying. Deltas are forwarded one at a time as the provider
    /// yields them; the stream ends with a `done` chunk.
    pub fn start(&self, req: ProviderRequest) -> Result<RelayStream, RelayError> {
        let id = req.request_id;
        let token = CancellationToken::new();
        let serial = self.serial.fetch_add(1, Ordering::Relaxed);
        {
            let mut active = self.active.lock().unwrap();
            if active.contains_key(&id) {
                return Err(RelayError::Duplicate(id));
            }
            active.insert(id, (serial, token.clone()));
        }
        let (tx, rx) = mpsc::channel(1);
        let mut upstream = self.provider.stream(req);
        let registry = self.active.clone();
        let task_token = token.clone();
        tokio::spawn(async move {
            loop {
                let next = tokio::select! {
                    biased;
                    _ = task_token.cancelled() => {
                        let _ = tx.send(WireChunk::end(id, Some(CANCELLED.into()))).await;
                        break;
                    }
                    _ = tx.closed() => {
                        tracing::debug!(request_id = id, "client went away");
                        break;
                    }
                    next = upstream.next() => next,
                };
                let (chunk, last) = match next {
                    Some(Ok(delta)) => (WireChunk::delta(id, delta), false),
                    Some(Err(e)) => (WireChunk::end(id, Some(e.to_string())), true),
                    None => (WireChunk::end(id, None), true),
                };
                if tx.send(chunk).await.is_err() || last {
                    break;
                }
            }
            // dropping the upstream stream aborts the provider request
            drop(upstream);
            let mut active = registry.lock().unwrap();
            if active.get(&id).is_some_and(|(s, _)| *s == serial) {
                active.remove(&id);
            }
        });
        Ok(RelayStream { rx, token, request_id: id, finished: false })
    }

    /// Stops the stream for `request_id`; false when none is active.
    pub fn cancel(&self, request_id: u64) -> bool {
        match self.active.lock().unwrap().remove(&request_id) {
            Some((_, token)) => {
                token.cancel();
                true
            }
            None => false,
        }
    }
}

/// Client side of a relayed stream. After cancellation no further deltas
/// are yielded, even ones already in flight.
pub struct RelayStream {
    rx: mpsc::Receiver<WireChunk>,
    token: CancellationToken,
    request_id: u64,
    finished: bool,
}

impl Stream for RelayStream {
    type Item = WireChunk;

    fn poll_next(mut self: Pin<&mut Self>, cx: &mut Context<'_>) -> Poll<Option<WireChunk>> {
        if self.finished {
            return Poll::Ready(None);
        }
        if self.token.is_cancelled() {
            self.finished = true;
            return Poll::Ready(Some(WireChunk::end(self.request_id, Some(CANCELLED.into()))));
        }
        match self.rx.poll_recv(cx) {
            Poll::Ready(Some(chunk)) => {
                self.finished = chunk.done;
                Poll::Ready(Some(chunk))
            }
            Poll::Ready(None) => {
                self.finished = true;
                Poll::Ready(None)
            }
            Poll::Pending => Poll::Pending,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latency::LatencyModel;
    use crate::provider::MockProvider;

    fn req(id: u64) -> ProviderRequest {
        ProviderRequest { request_id: id, system: String::new(), user: String::new(), max_sentences: None }
    }

    #[tokio::test]
    async fn scripted_two_deltas_then_done() {
        let relay = Relay::new(Arc::new(MockProvider::scripted(["Hello", " world."])));
        let got: Vec<WireChunk> = relay.start(req(1)).unwrap().collect().await;
        assert_eq!(
            got,
            vec![
                WireChunk::delta(1, "Hello".into()),
                WireChunk::delta(1, " world.".into()),
                WireChunk::end(1, None)
            ]
        );
    }

    #[tokio::test(start_paused = true)]
    async fn duplicate_rejected_until_finished() {
        let p = MockProvider::scripted(["a", "b"]).with_latency(LatencyModel::Fixed { ms: 50.0 }, 0);
        let relay = Relay::new(Arc::new(p));
        let s = relay.start(req(9)).unwrap();
        assert_eq!(relay.start(req(9)).err(), Some(RelayError::Duplicate(9)));
        let _: Vec<_> = s.collect().await;
        tokio::task::yield_now().await;
        assert_eq!(relay.active(), 0);
        assert!(relay.start(req(9)).is_ok());
    }

    #[tokio::test(start_paused = true)]
    async fn cancel_after_first_delta() {
        let p = MockProvider::scripted(["a", "b", "c", "d"]).with_latency(LatencyModel::Fixed { ms: 10.0 }, 0);
        let relay = Relay::new(Arc::new(p));
        let mut s = relay.start(req(2)).unwrap();
        assert_eq!(s.next().await.unwrap().delta, "a");
        // let the task run ahead so a delta is already buffered
        tokio::time::sleep(std::time::Duration::from_millis(30)).await;
        assert!(relay.cancel(2));
        let rest: Vec<_> = s.collect().await;
        assert_eq!(rest, vec![WireChunk::end(2, Some(CANCELLED.into()))]);
        assert!(!relay.cancel(2));
    }

    #[tokio::test]
    async fn provider_error_ends_stream() {
        let mut p = MockProvider::scripted(["a", "b"]);
        p.fail_after = Some(1);
        let got: Vec<_> = Relay::new(Arc::new(p)).start(req(3)).unwrap().collect().await;
        assert_eq!(got.len(), 2);
        assert!(got[1].done && got[1].error.as_deref() == Some("provider error: mock failure"));
    }

    #[tokio::test(start_paused = true)]
    async fn dropped_client_frees_the_id() {
        let p = MockProvider::scripted(["a", "b", "c"]).with_latency(LatencyModel::Fixed { ms: 10.0 }, 0);
        let relay = Relay::new(Arc::new(p));
        let s = relay.start(req(4)).unwrap();
        drop(s);
        tokio::time::sleep(std::time::Duration::from_millis(100)).await;
        assert!(!relay.is_active(4));
    }
}
