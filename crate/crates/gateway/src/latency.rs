//! Per-chunk delay model for the mock provider.

use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};
use std::time::Duration;

/// Published chunk latency moments, in ms.
pub const MEASURED_MEAN_MS: f64 = 242.0;
pub const MEASURED_MEDIAN_MS: f64 = 98.0;
pub const MEASURED_STD_MS: f64 = 262.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LatencyModel {
    Off,
    Fixed { ms: f64 },
    /// Delay in ms is `exp(N(mu, sigma²))`.
    LogNormal { mu: f64, sigma: f64 },
}

impl Default for LatencyModel {
    fn default() -> Self {
        Self::calibrated()
    }
}

impl LatencyModel {
    /// Median fixes `mu = ln(median)`; the mean then fixes
    /// `sigma = sqrt(2 ln(mean / median))`.
    pub fn calibrated() -> Self {
        let mu = MEASURED_MEDIAN_MS.ln();
        let sigma = (2.0 * (MEASURED_MEAN_MS / MEASURED_MEDIAN_MS).ln()).sqrt();
        LatencyModel::LogNormal { mu, sigma }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Duration {
        let ms = match *self {
            LatencyModel::Off => 0.0,
            LatencyModel::Fixed { ms } => ms,
            LatencyModel::LogNormal { mu, sigma } => {
                LogNormal::new(mu, sigma).expect("sigma is finite and non-negative").sample(rng)
            }
        };
        Duration::from_secs_f64(ms.max(0.0) / 1000.0)
    }

    pub fn mean_ms(&self) -> f64 {
        match *self {
            LatencyModel::Off => 0.0,
            LatencyModel::Fixed { ms } => ms,
            LatencyModel::LogNormal { mu, sigma } => (mu + sigma * sigma / 2.0).exp(),
        }
    }

    pub fn median_ms(&self) -> f64 {
        match *self {
            LatencyModel::Off => 0.0,
            LatencyModel::Fixed { ms } => ms,
            LatencyModel::LogNormal { mu, .. } => mu.exp(),
        }
    }

    pub fn std_ms(&self) -> f64 {
        match *self {
            LatencyModel::Off | LatencyModel::Fixed { .. } => 0.0,
            LatencyModel::LogNormal { sigma, .. } => self.mean_ms() * ((sigma * sigma).exp() - 1.0).sqrt(),
        }
    }
}
