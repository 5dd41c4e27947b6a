//! Completion providers: a deterministic mock and an OpenAI-compatible
//! chat-completions client. Both yield raw text deltas in order.

use std::collections::VecDeque;
use std::time::Duration;

use futures::stream::{self, BoxStream, StreamExt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::latency::LatencyModel;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProviderError {
    #[error("provider request failed: {0}")]
    Request(String),
    #[error("provider returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed stream event: {0}")]
    Malformed(String),
    #[error("provider error: {0}")]
    Upstream(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProviderRequest {
    pub request_id: u64,
    pub system: String,
    pub user: String,
    pub max_sentences: Option<u32>,
}

pub type DeltaStream = BoxStream<'static, Result<String, ProviderError>>;

pub trait Provider: Send + Sync {
    fn stream(&self, req: ProviderRequest) -> DeltaStream;
}

const LOREM: [&str; 48] = [
    "lorem", "ipsum", "dolor", "sit", "amet", "consectetur", "adipiscing", "elit", "sed", "do", "eiusmod", "tempor",
    "incididunt", "ut", "labore", "et", "dolore", "magna", "aliqua", "enim", "ad", "minim", "veniam", "quis",
    "nostrud", "exercitation", "ullamco", "laboris", "nisi", "aliquip", "ex", "ea", "commodo", "consequat", "duis",
    "aute", "irure", "in", "reprehenderit", "voluptate", "velit", "esse", "cillum", "fugiat", "nulla", "pariatur",
    "excepteur", "sint",
];

pub const MIN_SENTENCE_WORDS: usize = 6;
pub const MAX_SENTENCE_WORDS: usize = 14;

#[derive(Debug, Clone, PartialEq)]
pub enum MockMode {
    /// The same deltas for every request.
    Script(Vec<String>),
    /// Lorem-style sentences of 6-14 words, chunked 1-3 tokens at a time.
    Seeded { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MockProvider {
    pub mode: MockMode,
    pub latency: LatencyModel,
    pub latency_seed: u64,
    /// Fail with an upstream error after this many deltas.
    pub fail_after: Option<usize>,
}

fn mix(seed: u64, request_id: u64) -> u64 {
    seed ^ request_id.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

impl MockProvider {
    pub fn scripted<I: IntoIterator<Item = S>, S: Into<String>>(deltas: I) -> Self {
        Self {
            mode: MockMode::Script(deltas.into_iter().map(Into::into).collect()),
            latency: LatencyModel::Off,
            latency_seed: 0,
            fail_after: None,
        }
    }

    pub fn seeded(seed: u64) -> Self {
        Self { mode: MockMode::Seeded { seed }, latency: LatencyModel::Off, latency_seed: 0, fail_after: None }
    }

    pub fn with_latency(mut self, latency: LatencyModel, seed: u64) -> Self {
        self.latency = latency;
        self.latency_seed = seed;
        self
    }

    /// The deltas this provider emits for a request, without delays.
    pub fn deltas(&self, request_id: u64, max_sentences: Option<u32>) -> Vec<String> {
        match &self.mode {
            MockMode::Script(d) => d.clone(),
            MockMode::Seeded { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(mix(*seed, request_id));
                let mut tokens = Vec::new();
                for s in 0..max_sentences.unwrap_or(1).max(1) {
                    let n = rng.random_range(MIN_SENTENCE_WORDS..=MAX_SENTENCE_WORDS);
                    for i in 0..n {
                        let mut w = LOREM[rng.random_range(0..LOREM.len())].to_string();
                        if i == 0 {
                            w[..1].make_ascii_uppercase();
                        }
                        if i + 1 == n {
                            w.push('.');
                        }
                        tokens.push(if s == 0 && i == 0 { w } else { format!(" {w}") });
                    }
                }
                let mut deltas = Vec::new();
                let mut i = 0;
                while i < tokens.len() {
                    let k = rng.random_range(1..=3).min(tokens.len() - i);
                    deltas.push(tokens[i..i + k].concat());
                    i += k;
                }
                deltas
            }
        }
    }

    /// Delay before each delta of a request, as the stream sleeps them.
    pub fn delays(&self, request_id: u64, count: usize) -> Vec<Duration> {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(self.latency_seed, request_id));
        (0..count).map(|_| self.latency.sample(&mut rng)).collect()
    }
}

impl Provider for MockProvider {
    fn stream(&self, req: ProviderRequest) -> DeltaStream {
        let deltas: VecDeque<String> = self.deltas(req.request_id, req.max_sentences).into();
        let rng = ChaCha8Rng::seed_from_u64(mix(self.latency_seed, req.request_id));
        let latency = self.latency;
        let fail_after = self.fail_after;
        stream::unfold((deltas, rng, 0usize, false), move |(mut deltas, mut rng, sent, failed)| async move {
            if failed {
                return None;
            }
            if fail_after == Some(sent) {
                return Some((Err(ProviderError::Upstream("mock failure".into())), (deltas, rng, sent, true)));
            }
            let delta = deltas.pop_front()?;
            let delay = latency.sample(&mut rng);
            if delay > Duration::ZERO {
                tokio::time::sleep(delay).await;
            }
            Some((Ok(delta), (deltas, rng, sent + 1, false)))
        })
        .boxed()
    }
}

/// Streams from `{base_url}/chat/completions` with `stream: true`.
#[derive(Debug, Clone)]
pub struct OpenAiProvider {
    pub base_url: String,
    pub api_key: Option<String>,
    pub model: String,
    client: reqwest::Client,
}

impl OpenAiProvider {
    pub fn new(base_url: impl Into<String>, api_key: Option<String>, model: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key,
            model: model.into(),
            client: reqwest::Client::new(),
        }
    }
}

/// Incremental server-sent-events decoder yielding `data:` payloads.
#[derive(Debug, Default)]
pub struct SseDecoder {
    buf: String,
}

impl SseDecoder {
    pub fn push(&mut self, bytes: &str) -> Vec<String> {
        self.buf.extend(bytes.chars().filter(|&c| c != '\r'));
        let mut out = Vec::new();
        while let Some(end) = self.buf.find("\n\n") {
            let block: String = self.buf.drain(..end + 2).collect();
            let data: Vec<&str> = block
                .lines()
                .filter_map(|l| l.strip_prefix("data:"))
                .map(|d| d.strip_prefix(' ').unwrap_or(d))
                .collect();
            if !data.is_empty() {
                out.push(data.join("\n"));
            }
        }
        out
    }
}

enum Parsed {
    Delta(String),
    Done,
    Skip,
}

fn parse_event(data: &str) -> Result<Parsed, ProviderError> {
    if data.trim() == "[DONE]" {
        return Ok(Parsed::Done);
    }
    let v: serde_json::Value = serde_json::from_str(data).map_err(|e| ProviderError::Malformed(e.to_string()))?;
    if let Some(err) = v.get("error") {
        let msg = err.get("message").and_then(|m| m.as_str()).map(str::to_string).unwrap_or_else(|| err.to_string());
        return Err(ProviderError::Upstream(msg));
    }
    match v["choices"][0]["delta"]["content"].as_str() {
        Some(s) if !s.is_empty() => Ok(Parsed::Delta(s.to_string())),
        _ => Ok(Parsed::Skip),
    }
}

struct SseState {
    body: Option<BoxStream<'static, reqwest::Result<bytes::Bytes>>>,
    decoder: SseDecoder,
    utf8: Vec<u8>,
    ready: VecDeque<Result<String, ProviderError>>,
    finished: bool,
}

impl Provider for OpenAiProvider {
    fn stream(&self, req: ProviderRequest) -> DeltaStream {
        let mut builder = self.client.post(format!("{}/chat/completions", self.base_url)).json(&json!({
            "model": self.model,
            "stream": true,
            "messages": [
                {"role": "system", "content": req.system},
                {"role": "user", "content": req.user},
            ],
        }));
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let open = async move {
            let resp = builder.send().await.map_err(|e| ProviderError::Request(e.to_string()))?;
            let status = resp.status();
            if !status.is_success() {
                let body = resp.text().await.unwrap_or_default();
                return Err(ProviderError::Status { status: status.as_u16(), body });
            }
            Ok(resp.bytes_stream().boxed())
        };
        stream::once(open)
            .flat_map(|opened| {
                let state = match opened {
                    Ok(body) => SseState {
                        body: Some(body),
                        decoder: SseDecoder::default(),
                        utf8: Vec::new(),
                        ready: VecDeque::new(),
                        finished: false,
                    },
                    Err(e) => SseState {
                        body: None,
                        decoder: SseDecoder::default(),
                        utf8: Vec::new(),
                        ready: VecDeque::from([Err(e)]),
                        finished: true,
                    },
                };
                stream::unfold(state, |mut st| async move {
                    loop {
                        if let Some(item) = st.ready.pop_front() {
                            if item.is_err() {
                                st.ready.clear();
                                st.finished = true;
                                st.body = None;
                            }
                            return Some((item, st));
                        }
                        if st.finished {
                            return None;
                        }
                        let body = st.body.as_mut()?;
                        match body.next().await {
                            None => {
                                st.finished = true;
                            }
                            Some(Err(e)) => st.ready.push_back(Err(ProviderError::Request(e.to_string()))),
                            Some(Ok(bytes)) => {
                                st.utf8.extend_from_slice(&bytes);
                                // keep an incomplete trailing code point for the next read
                                let valid = match std::str::from_utf8(&st.utf8) {
                                    Ok(_) => st.utf8.len(),
                                    Err(e) => e.valid_up_to(),
                                };
                                let text = String::from_utf8(st.utf8.drain(..valid).collect()).expect("validated");
                                for data in st.decoder.push(&text) {
                                    match parse_event(&data) {
                                        Ok(Parsed::Delta(d)) => st.ready.push_back(Ok(d)),
                                        Ok(Parsed::Skip) => {}
                                        Ok(Parsed::Done) => {
                                            st.finished = true;
                                            st.body = None;
                                            break;
                                        }
                                        Err(e) => st.ready.push_back(Err(e)),
                                    }
                                }
                            }
                        }
                    }
                })
            })
            .boxed()
    }
}
