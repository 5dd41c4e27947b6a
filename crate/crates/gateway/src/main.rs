use anyhow::Context;
use gesturetext_gateway::config::GatewayConfig;
use gesturetext_gateway::relay::Relay;
use gesturetext_gateway::server::{router, AppState};
use tracing_subscriber::EnvFilter;

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt().with_env_filter(EnvFilter::from_default_env()).init();
    let cfg = GatewayConfig::from_env()?;
    let state = AppState { relay: Relay::new(cfg.provider.build()), provider_kind: cfg.provider.kind() };
    let listener = tokio::net::TcpListener::bind(cfg.bind).await.with_context(|| format!("binding {}", cfg.bind))?;
    tracing::info!(addr = %cfg.bind, provider = cfg.provider.kind(), "gateway listening");
    axum::serve(listener, router(state)).await?;
    Ok(())
}
