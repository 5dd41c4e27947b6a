//! Streaming gateway between the editor and a completion provider: prompt
//! templates, an ordered per-request relay with cancellation, and a
//! deterministic mock provider with a calibrated latency model.

pub mod config;
pub mod latency;
pub mod provider;
pub mod relay;
pub mod server;
pub mod synonyms;
pub mod templates;

pub use latency::LatencyModel;
pub use provider::{MockProvider, OpenAiProvider, Provider, ProviderRequest};
pub use relay::{Relay, WireChunk};
pub use templates::{render_prompt, GenerationRequest, TemplateId};
