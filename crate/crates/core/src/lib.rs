//! Classical quantum-circuit workbench: low-weight Pauli propagation, an
//! exact statevector oracle, the advantage-detection circuit construction,
//! sample-and-query vectors, noisy phase sensing and Bell games.

pub mod bell;
pub mod circuit;
pub mod dequant;
pub mod detect;
pub mod error;
pub mod pauli;
pub mod propagation;
pub mod seed;
pub mod sensing;
pub mod statevector;

pub use circuit::{Block, Circuit, Gate, GateKind, Layer, Register};
pub use error::{Error, Result};
pub use pauli::{Pauli, PauliMap, PauliString, TransferMatrix};
pub use propagation::PropagationConfig;
pub use statevector::StateVector;

/// Version string embedded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
