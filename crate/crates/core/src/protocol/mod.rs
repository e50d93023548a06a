//! The commit/unveil state machine with Bob as the sender of the photons.
//!
//! Commitment: Bob prepares `|R_B>_η` and sends it; Alice measures in `θ`,
//! obtains `R_A`, and announces one excluded position `x` chosen so that the
//! remaining outcomes have parity `b` under the public mask `r` (with `x`
//! removed from both). Unveiling: Alice announces `b`, her claimed outcomes
//! and `θ`; Bob checks matched-basis consistency and the parity.
//!
//! Positions are 0-based throughout.

mod bits;
mod code;
mod commit;
mod messages;
mod round;

pub use bits::{exclude, parity, BasisString, BitString};
pub use code::Code;
pub use commit::{
    alice_choose_exclusion, alice_measure, bob_prepare, bob_verify, exclusion_candidates,
    measure_photons, prepare_product,
};
pub use messages::{
    AbortReason, AliceRecord, BobSecret, EvidenceAnnouncement, Phase, ProtocolParams, Transcript,
    UnveilAnnouncement, Verdict,
};
pub use round::{run_round, Acceptor, BobState, CommitState, Committer, QuantumChannel};

use thiserror::Error;

use crate::quantum::QuantumError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("{what} supports n <= {max}, got {n}")]
    SizeLimit { what: &'static str, n: usize, max: usize },
    #[error("round aborted: {0}")]
    Aborted(AbortReason),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

pub type Result<T> = std::result::Result<T, ProtocolError>;
