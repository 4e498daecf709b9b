//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by any layer of the workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("state length {0} is not a power of two between 2 and 8")]
    BadStateLength(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("tensor product would exceed three qubits")]
    SizeOverflow,

    #[error("not a valid density matrix: {0}")]
    InvalidDensity(String),

    #[error("Bloch vector norm {0:.6} exceeds 1")]
    BlochNormExceedsOne(f64),

    #[error("zero-norm state cannot be normalized")]
    ZeroNorm,

    #[error("{name} = {value} is outside [0, 1]")]
    ParameterRange { name: &'static str, value: f64 },

    #[error("singular PDBS: {0}")]
    SingularOptics(String),

    #[error("unknown optics preset '{0}' (expected \"measured\" or \"ideal\")")]
    UnknownOpticsPreset(String),

    #[error("unknown protocol '{0}' (expected \"bb84\" or \"r04\")")]
    UnknownProtocol(String),

    #[error("index {index} out of range for {what}")]
    IndexOutOfRange { what: &'static str, index: usize },

    #[error("malformed announcement: {0}")]
    MalformedAnnouncement(String),

    #[error("probe states are indistinguishable")]
    IndistinguishableStates,

    #[error("invalid photon statistics: {0}")]
    InvalidStatistics(String),

    #[error("invalid detector model: {0}")]
    InvalidDetector(String),

    #[error("tomography: {0}")]
    Tomography(String),

    #[error("monte carlo: {0}")]
    MonteCarlo(String),

    #[error("target purity {target:.6} is unreachable (attainable range ({floor:.6}, {ceiling:.6}])")]
    UnreachablePurity { target: f64, floor: f64, ceiling: f64 },

    #[error("configuration errors:\n  {}", .0.join("\n  "))]
    InvalidConfig(Vec<String>),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
