//! Dense finite-dimensional quantum mechanics over qubit registers.
//!
//! Amplitude indices are big-endian: qubit 0 is the most significant bit of
//! the index. All operations are pure; measurement randomness is passed in as
//! an explicit uniform real in `[0, 1)`.

mod density;
mod split;
mod state;
mod steering;

pub use density::{partial_trace, partial_trace_density, trace_distance, DensityMatrix};
pub use split::Split;
pub use state::{prepare_bb84, tensor, measure_qubit, Basis, StateVector, C64};
pub use steering::{
    branch_probabilities, complete_orthonormal, measure_in_basis, steering_basis, Ensemble,
    SteeringBasis,
};

use thiserror::Error;

/// Largest joint register the simulator will allocate.
pub const MAX_QUBITS: usize = 12;

/// Tolerance for algebraic identities (normalization, hermiticity, trace).
pub const ALGEBRAIC_TOL: f64 = 1e-10;

/// Tolerance for synthesized constructions such as steering bases.
pub const SYNTHESIS_TOL: f64 = 1e-9;

/// Branches with probability below this are treated as unreachable.
pub const ZERO_BRANCH: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit register")]
    InvalidQubit { qubit: usize, num_qubits: usize },
    #[error("inconsistent subsystem partition: {0}")]
    InvalidPartition(String),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("amplitude count {0} is not a power of two >= 2")]
    InvalidDimension(usize),
    #[error("state has norm^2 {0}, expected 1")]
    NotNormalized(f64),
    #[error("register of {0} qubits exceeds the {MAX_QUBITS}-qubit limit")]
    TooManyQubits(usize),
    #[error("measurement selected a branch of numerically zero probability")]
    ZeroProbabilityBranch,
    #[error("measurement randomness {0} outside [0, 1)")]
    InvalidRandomness(f64),
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
    #[error("vectors are not orthonormal (max deviation {0:e})")]
    NotOrthonormal(f64),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("steering infeasible: target mixture differs from the reduced state by {deviation:e}")]
    SteeringInfeasible { deviation: f64 },
}

pub type Result<T> = std::result::Result<T, QuantumError>;
