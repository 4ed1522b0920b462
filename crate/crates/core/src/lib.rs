//! Perfect space-time block codes from cyclic division algebras.
//!
//! The crate is split the way a code is built and used:
//!
//! - [`algint`]: exact integer arithmetic and the non-norm element searches.
//! - [`lattices`]: unitary generator matrices for the shaping lattice.
//! - [`codebook`]: constellations, code specs, encoders and code variants.
//! - [`analysis`]: unitarity, power uniformity and minimum-determinant checks.
//! - [`sim`]: channel model, ML and sphere decoders, Monte Carlo runs.

pub mod algint;
pub mod analysis;
pub mod codebook;
pub mod config;
pub mod error;
pub mod lattices;
pub mod linalg;
pub mod rng;
pub mod sim;

use serde::{Deserialize, Serialize};

pub use config::SearchConfig;
pub use error::{Error, Result};

/// Base field of the code: `Q(i)` for QAM alphabets, `Q(w3)` for HEX.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldTag {
    Qam,
    Hex,
}

impl std::str::FromStr for FieldTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qam" => Ok(FieldTag::Qam),
            "hex" => Ok(FieldTag::Hex),
            other => Err(Error::InvalidConfig(format!("unknown field '{other}'"))),
        }
    }
}

impl std::fmt::Display for FieldTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FieldTag::Qam => "qam",
            FieldTag::Hex => "hex",
        })
    }
}
