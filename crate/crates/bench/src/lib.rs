//! Shared fixtures for the benchmarks.

use semiexp::{SimulationConfig, WeibullLikeSpec};

/// Unit-scale law with `eps = 0.5`.
pub fn law() -> WeibullLikeSpec {
    WeibullLikeSpec::new(1.0, 0.5).expect("valid law")
}

pub fn config(n: u64, x: f64, samples: u64) -> SimulationConfig {
    SimulationConfig::new(law(), n, x, samples, 1).expect("valid config")
}
