use thiserror::Error;

/// Errors raised while constructing, checking or simulating codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{value} is not a unit modulo {modulus}")]
    NotAUnit { value: i64, modulus: u64 },

    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("moduli {0} and {1} are not coprime")]
    NonCoprimeModuli(u64, u64),

    #[error("progression cap of {cap} steps exceeded searching {b} mod {modulus}")]
    ProgressionCap { b: u64, modulus: u64, cap: u64 },

    #[error("{q} is inert or ramified in {ring}")]
    InertOrRamified { q: u64, ring: &'static str },

    #[error("no HEX code for n divisible by 4 (n = {0})")]
    HexMultipleOfFour(usize),

    #[error("HEX shaping undefined for multiples of 4 (n = {0})")]
    HexShapingUndefined(usize),

    #[error("odd-degree lattice needs an odd dimension, got {0}")]
    EvenOddDegree(usize),

    #[error("lattice prime {p} exceeds the configured cap {cap}")]
    LatticePrimeCap { p: u64, cap: u64 },

    #[error("imaginary residue {0:e} exceeds the realness threshold")]
    ImaginaryResidue(f64),

    #[error("cannot combine generators of dimensions {0} and {1}")]
    IncompatibleGenerators(usize, usize),

    #[error("expected {expected} entries, got {got}")]
    WrongLength { expected: usize, got: usize },

    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },

    #[error("search space of {size} exceeds the cap {cap}; use Monte Carlo mode")]
    SearchSpaceOverflow { size: f64, cap: u64 },

    #[error("codebook of {size} codewords exceeds the exhaustive decoder cap {cap}; use the sphere decoder")]
    CodebookTooLarge { size: f64, cap: u64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid spec file: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
