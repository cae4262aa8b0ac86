use alloc::string::String;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid shape: q = {q}, k = {k} (need q >= 2, k >= 1)")]
    InvalidShape { q: usize, k: usize },

    #[error("tolerance must be finite and positive, got {0}")]
    InvalidTolerance(f64),

    #[error("amplitude table has {found} entries, expected {expected}")]
    TableSize { expected: usize, found: usize },

    #[error("non-finite amplitude for configuration {config}, output {output}")]
    NonFinite { config: String, output: usize },

    #[error("configuration index {index} out of range for {count} local configurations")]
    ConfigOutOfRange { index: usize, count: usize },

    #[error("invalid configuration string {0:?}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("permutation is not a bijection on the state set")]
    InvalidPermutation,

    #[error("cycle enumeration exceeded the cap of {cap} cycles")]
    CycleCapExceeded { cap: usize },

    #[error("path enumeration exceeded the cap of {cap} paths")]
    PathCapExceeded { cap: usize },

    #[error("rule has no deterministic sector, so no infinite-lattice configuration is admissible")]
    NoDeterministicSector,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parameter constraint violated: {0}")]
    Parameter(String),

    #[error("configuration space of {states} states exceeds the cap of {cap}")]
    StateCapExceeded { states: usize, cap: usize },

    #[error("state vector is not normalized (norm squared {0})")]
    Unnormalized(f64),
}

impl Error {
    /// Resource errors are the ones a caller can fix by raising a cap.
    pub fn is_resource(&self) -> bool {
        matches!(
            self,
            Error::CycleCapExceeded { .. } | Error::PathCapExceeded { .. } | Error::StateCapExceeded { .. }
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;
