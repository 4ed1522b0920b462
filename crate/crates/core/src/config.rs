//! Search limits shared by the number-theoretic and lattice searches.

use serde::{Deserialize, Serialize};

/// Environment variable overriding [`SearchConfig::progression_cap`] and
/// [`SearchConfig::exhaustive_cap`].
pub const SEARCH_CAP_ENV: &str = "PERFECTST_SEARCH_CAP";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Maximum number of steps taken along an arithmetic progression.
    pub progression_cap: u64,
    /// Largest prime the odd-degree lattice may use.
    pub lattice_prime_cap: u64,
    /// Largest difference-vector count searched exhaustively.
    pub exhaustive_cap: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { progression_cap: 10_000_000, lattice_prime_cap: 10_000, exhaustive_cap: 10_000_000 }
    }
}

impl SearchConfig {
    /// Defaults, with caps taken from `PERFECTST_SEARCH_CAP` when it parses.
    pub fn from_env() -> Self {
        let mut cfg = Self::default();
        if let Some(cap) = std::env::var(SEARCH_CAP_ENV).ok().and_then(|v| v.trim().parse::<u64>().ok()) {
            cfg.progression_cap = cap;
            cfg.exhaustive_cap = cap;
        }
        cfg
    }
}
