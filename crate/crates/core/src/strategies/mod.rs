//! Party behaviors, selectable by identifier: `honest_alice`, `flip_alice`,
//! `mlc_alice`, `honest_bob`, `epr_bob`, `guess_bob`.

mod alice;
mod bob;
mod mlc;

pub use alice::{
    deferral_detection, flip_cheat_unveil, Alteration, DetectionStats, FlipAlice, HonestAlice,
    MlcAlice,
};
pub use bob::{
    commitment_posterior, guess_commitment, BobView, EprBob, GuessBob, GuessMode, HonestBob,
    EPR_BOB_MAX_N, EXACT_POSTERIOR_MAX_N,
};
pub use mlc::{
    default_ensembles, epr_bob_prepare, epr_pairs, mlc_build_plan, mlc_open, EprPreparation,
    MlcOpening, MlcPlan, EPR_PREPARE_MAX_N, MLC_MAX_N,
};

use crate::protocol::{Acceptor, Committer, ProtocolError, Result};

pub const COMMITTER_IDS: [&str; 3] = ["honest_alice", "flip_alice", "mlc_alice"];
pub const ACCEPTOR_IDS: [&str; 3] = ["honest_bob", "epr_bob", "guess_bob"];

pub fn committer_from_id(id: &str) -> Result<Box<dyn Committer>> {
    match id {
        "honest_alice" => Ok(Box::new(HonestAlice::default())),
        "flip_alice" => Ok(Box::new(FlipAlice::default())),
        "mlc_alice" => Ok(Box::new(MlcAlice::default())),
        other => Err(ProtocolError::InvalidParams(format!(
            "unknown committer strategy {other:?} (expected one of {COMMITTER_IDS:?})"
        ))),
    }
}

pub fn acceptor_from_id(id: &str) -> Result<Box<dyn Acceptor>> {
    match id {
        "honest_bob" => Ok(Box::new(HonestBob)),
        "epr_bob" => Ok(Box::new(EprBob)),
        "guess_bob" => Ok(Box::new(GuessBob::default())),
        other => Err(ProtocolError::InvalidParams(format!(
            "unknown acceptor strategy {other:?} (expected one of {ACCEPTOR_IDS:?})"
        ))),
    }
}
