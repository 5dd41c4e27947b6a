//! Shared pieces of the `gesturetext` command: the mock token source used
//! for recording, and the scripted task scenarios behind the golden logs.

pub mod scenarios;

use gesturetext::sim::{TimedChunk, TokenSource};
use gesturetext_gateway::MockProvider;

/// Feeds the engine from the gateway's mock provider, with chunk delays
/// as the gateway would sleep them, rounded to whole milliseconds. Like the
/// wire protocol, every stream ends with an empty `done` chunk.
pub struct MockTokenSource {
    pub provider: MockProvider,
}

impl MockTokenSource {
    pub fn new(provider: MockProvider) -> Self {
        Self { provider }
    }
}

impl TokenSource for MockTokenSource {
    fn stream(&mut self, request_id: u64, _paragraph: &str) -> Vec<TimedChunk> {
        let deltas = self.provider.deltas(request_id, None);
        let delays = self.provider.delays(request_id, deltas.len());
        let mut chunks: Vec<TimedChunk> = deltas
            .into_iter()
            .zip(delays)
            .map(|(delta, d)| TimedChunk { delay_ms: (d.as_secs_f64() * 1000.0).round() as u64, delta, done: false })
            .collect();
        chunks.push(TimedChunk { delay_ms: 0, delta: String::new(), done: true });
        chunks
    }
}
