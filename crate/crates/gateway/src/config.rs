//! Gateway configuration from environment variables.

use std::net::SocketAddr;
use std::sync::Arc;

use crate::latency::LatencyModel;
use crate::provider::{MockProvider, OpenAiProvider, Provider};

pub const DEFAULT_BIND: &str = "127.0.0.1:8787";
pub const DEFAULT_MODEL: &str = "gpt-4o-mini";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("{var}: {msg}")]
    Invalid { var: &'static str, msg: String },
    #[error("GESTURETEXT_MOCK=0 needs GESTURETEXT_PROVIDER_URL")]
    MissingProvider,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProviderConfig {
    Mock { seed: u64, latency: LatencyModel, latency_seed: u64 },
    OpenAi { base_url: String, api_key: Option<String>, model: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GatewayConfig {
    pub bind: SocketAddr,
    pub provider: ProviderConfig,
}

fn parse<T: std::str::FromStr>(var: &'static str, raw: Option<String>, default: T) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    match raw {
        None => Ok(default),
        Some(s) => s.trim().parse().map_err(|e: T::Err| ConfigError::Invalid { var, msg: e.to_string() }),
    }
}

/// `calibrated`, `off`, or `fixed:<ms>`.
pub fn parse_latency(s: &str) -> Result<LatencyModel, String> {
    match s.trim() {
        "calibrated" | "default" => Ok(LatencyModel::calibrated()),
        "off" | "0" => Ok(LatencyModel::Off),
        other => match other.strip_prefix("fixed:").map(str::parse::<f64>) {
            Some(Ok(ms)) if ms >= 0.0 => Ok(LatencyModel::Fixed { ms }),
            _ => Err(format!("unknown latency model {other:?}")),
        },
    }
}

impl GatewayConfig {
    pub fn from_env() -> Result<Self, ConfigError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    /// Reads `GESTURETEXT_*` variables through `get`. Without a provider
    /// URL the mock is used.
    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let bind = parse("GESTURETEXT_BIND", get("GESTURETEXT_BIND"), DEFAULT_BIND.parse().unwrap())?;
        let url = get("GESTURETEXT_PROVIDER_URL").filter(|s| !s.trim().is_empty());
        let mock = match get("GESTURETEXT_MOCK").as_deref().map(str::trim) {
            None => url.is_none(),
            Some("1" | "true" | "yes") => true,
            Some("0" | "false" | "no") => false,
            Some(other) => {
                return Err(ConfigError::Invalid { var: "GESTURETEXT_MOCK", msg: format!("not a flag: {other:?}") })
            }
        };
        let provider = if mock {
            let latency = match get("GESTURETEXT_LATENCY") {
                None => LatencyModel::calibrated(),
                Some(s) => parse_latency(&s).map_err(|msg| ConfigError::Invalid { var: "GESTURETEXT_LATENCY", msg })?,
            };
            ProviderConfig::Mock {
                seed: parse("GESTURETEXT_MOCK_SEED", get("GESTURETEXT_MOCK_SEED"), 7)?,
                latency,
                latency_seed: parse("GESTURETEXT_LATENCY_SEED", get("GESTURETEXT_LATENCY_SEED"), 0)?,
            }
        } else {
            ProviderConfig::OpenAi {
                base_url: url.ok_or(ConfigError::MissingProvider)?,
                api_key: get("GESTURETEXT_API_KEY").filter(|s| !s.is_empty()),
                model: get("GESTURETEXT_MODEL").unwrap_or_else(|| DEFAULT_MODEL.to_string()),
            }
        };
        Ok(Self { bind, provider })
    }
}

impl ProviderConfig {
    pub fn build(&self) -> Arc<dyn Provider> {
        match self {
            ProviderConfig::Mock { seed, latency, latency_seed } => {
                Arc::new(MockProvider::seeded(*seed).with_latency(*latency, *latency_seed))
            }
            ProviderConfig::OpenAi { base_url, api_key, model } => {
                Arc::new(OpenAiProvider::new(base_url.clone(), api_key.clone(), model.clone()))
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ProviderConfig::Mock { .. } => "mock",
            ProviderConfig::OpenAi { .. } => "openai",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn cfg(vars: &[(&str, &str)]) -> Result<GatewayConfig, ConfigError> {
        let m: HashMap<String, String> = vars.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        GatewayConfig::from_lookup(|k| m.get(k).cloned())
    }

    #[test]
    fn defaults_to_mock() {
        let c = cfg(&[]).unwrap();
        assert_eq!(c.bind, DEFAULT_BIND.parse().unwrap());
        assert_eq!(c.provider, ProviderConfig::Mock { seed: 7, latency: LatencyModel::calibrated(), latency_seed: 0 });
    }

    #[test]
    fn provider_url_selects_openai() {
        let c = cfg(&[("GESTURETEXT_PROVIDER_URL", "http://x/v1"), ("GESTURETEXT_API_KEY", "k")]).unwrap();
        assert_eq!(
            c.provider,
            ProviderConfig::OpenAi { base_url: "http://x/v1".into(), api_key: Some("k".into()), model: DEFAULT_MODEL.into() }
        );
        assert_eq!(cfg(&[("GESTURETEXT_MOCK", "0")]), Err(ConfigError::MissingProvider));
    }

    #[test]
    fn latency_and_seeds() {
        let c = cfg(&[("GESTURETEXT_LATENCY", "fixed:12.5"), ("GESTURETEXT_MOCK_SEED", "3")]).unwrap();
        assert_eq!(c.provider, ProviderConfig::Mock { seed: 3, latency: LatencyModel::Fixed { ms: 12.5 }, latency_seed: 0 });
        assert!(cfg(&[("GESTURETEXT_LATENCY", "fast")]).is_err());
        assert!(cfg(&[("GESTURETEXT_MOCK_SEED", "x")]).is_err());
    }
}
