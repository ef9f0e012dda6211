use thiserror::Error;

/// Errors raised by the simulation and experiment routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit count mismatch: expected {expected}, got {got}")]
    QubitMismatch { expected: usize, got: usize },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("{n_qubits} qubits exceeds the supported maximum of {max}")]
    TooManyQubits { n_qubits: usize, max: usize },

    #[error("width {width} exceeds the dense limit of {limit} qubits")]
    DenseLimit { width: usize, limit: usize },

    #[error("gate supports overlap on qubit {qubit}")]
    OverlappingSupports { qubit: usize },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("promise violated: success probability {probability:.6} lies in (1/3, 2/3)")]
    PromiseViolation { probability: f64 },

    #[error("instance label {label} disagrees with its promise probability {probability:.6}")]
    LabelMismatch { label: String, probability: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}
