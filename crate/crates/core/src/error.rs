use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid scheme configuration: {0}")]
    InvalidConfig(String),
    #[error("combination index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: u128, limit: u128 },
    #[error("combination rank {rank} is unaddressable (only {limit} patterns carry bits)")]
    Unaddressable { rank: u128, limit: u128 },
    #[error("not a sorted {k}-subset of 0..{n}")]
    InvalidCombination { n: usize, k: usize },
    #[error("bit length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("codebook too large ({frame_bits} bits > cap {cap}), use streaming enumeration")]
    CodebookTooLarge { frame_bits: usize, cap: usize },
    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    Shape {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("variance must be non-negative and finite, got {0}")]
    InvalidVariance(f64),
    #[error("binomial coefficient C({n}, {k}) exceeds 128-bit range")]
    Overflow { n: usize, k: usize },
}
