use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    AliceRecord, BasisString, BitString, BobSecret, EvidenceAnnouncement, Phase, ProtocolError,
    ProtocolParams, Result, Transcript, UnveilAnnouncement, Verdict,
};
use crate::harness::derive_seed;
use crate::quantum::StateVector;

/// The joint quantum state in flight. `photons[i]` is the qubit index of
/// photon `i` (Alice's side); `hidden` are qubits Bob kept for himself.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    pub joint: StateVector,
    pub photons: Vec<usize>,
    pub hidden: Vec<usize>,
    pub description: String,
}

impl QuantumChannel {
    /// A channel carrying only Alice's photons, qubit `i` = photon `i`.
    pub fn separable(state: StateVector) -> Self {
        let n = state.num_qubits();
        QuantumChannel {
            joint: state,
            photons: (0..n).collect(),
            hidden: Vec::new(),
            description: format!("separable product of {n} BB84 photons"),
        }
    }
}

/// Alice's private state between the commitment and the unveiling.
#[derive(Debug, Clone, PartialEq)]
pub enum CommitState {
    /// She measured every photon and chose `x` by the exclusion rule.
    Measured(AliceRecord),
    /// She announced `x` without measuring.
    Deferred { x: usize },
}

impl CommitState {
    pub fn x(&self) -> usize {
        match self {
            CommitState::Measured(record) => record.x,
            CommitState::Deferred { x } => *x,
        }
    }

    pub fn record(&self) -> Option<&AliceRecord> {
        match self {
            CommitState::Measured(record) => Some(record),
            CommitState::Deferred { .. } => None,
        }
    }
}

/// Bob's private state: his bases, and `R_B` once it is determined.
#[derive(Debug, Clone, PartialEq)]
pub struct BobState {
    pub eta: BasisString,
    pub r_b: Option<BitString>,
}

impl BobState {
    pub fn secret(&self) -> Option<BobSecret> {
        self.r_b.as_ref().map(|r_b| BobSecret { r_b: r_b.clone(), eta: self.eta.clone() })
    }
}

/// A committer (Alice) behavior.
pub trait Committer: Send + Sync {
    fn id(&self) -> &'static str;

    /// Steps from receiving the photons to fixing the excluded position.
    fn commit(
        &self,
        params: &ProtocolParams,
        channel: &mut QuantumChannel,
        rng: &mut ChaCha8Rng,
    ) -> Result<CommitState>;

    /// The opening announcement.
    fn unveil(
        &self,
        params: &ProtocolParams,
        state: &CommitState,
        channel: &mut QuantumChannel,
        rng: &mut ChaCha8Rng,
    ) -> Result<UnveilAnnouncement>;
}

/// An acceptor (Bob) behavior.
pub trait Acceptor: Send + Sync {
    fn id(&self) -> &'static str;

    fn prepare(&self, params: &ProtocolParams, rng: &mut ChaCha8Rng) -> Result<(BobState, QuantumChannel)>;

    /// Optional guess of the committed bit from the view after the evidence.
    fn guess(&self, _params: &ProtocolParams, _state: &BobState, _evidence: &EvidenceAnnouncement) -> Result<Option<u8>> {
        Ok(None)
    }

    fn verify(
        &self,
        params: &ProtocolParams,
        state: &mut BobState,
        channel: &mut QuantumChannel,
        evidence: &EvidenceAnnouncement,
        unveil: &UnveilAnnouncement,
        rng: &mut ChaCha8Rng,
    ) -> Result<Verdict>;
}

const ALICE_STREAM: u64 = 0xA11CE;
const BOB_STREAM: u64 = 0xB0B;

/// Runs one round: preparation, commitment, evidence, (empty) holding phase,
/// unveiling and verification. Deterministic in `round_seed`.
///
/// Strategy aborts become [`Verdict::Abort`]; other failures are errors.
pub fn run_round(
    alice: &dyn Committer,
    bob: &dyn Acceptor,
    params: &ProtocolParams,
    round_seed: u64,
) -> Result<Transcript> {
    params.validate()?;
    let mut alice_rng = ChaCha8Rng::seed_from_u64(derive_seed(round_seed, ALICE_STREAM));
    let mut bob_rng = ChaCha8Rng::seed_from_u64(derive_seed(round_seed, BOB_STREAM));

    let (mut bob_state, mut channel) = bob.prepare(params, &mut bob_rng)?;
    if channel.photons.len() != params.n {
        return Err(ProtocolError::LengthMismatch { left: params.n, right: channel.photons.len() });
    }
    let mut transcript = Transcript {
        params: params.clone(),
        round_seed,
        alice_strategy: alice.id().to_string(),
        bob_strategy: bob.id().to_string(),
        quantum_message: channel.description.clone(),
        bob_secret: bob_state.secret(),
        alice_record: None,
        evidence: None,
        bob_guess: None,
        unveil: None,
        verdict: Verdict::Accept,
    };

    let commit = match alice.commit(params, &mut channel, &mut alice_rng) {
        Ok(c) => c,
        Err(ProtocolError::Aborted(reason)) => {
            transcript.verdict = Verdict::Abort { phase: Phase::Commit, reason };
            return Ok(transcript);
        }
        Err(e) => return Err(e),
    };
    transcript.alice_record = commit.record().cloned();
    let evidence = EvidenceAnnouncement { x: commit.x() };
    if evidence.x >= params.n {
        return Err(ProtocolError::IndexOutOfRange { index: evidence.x, len: params.n });
    }
    transcript.evidence = Some(evidence);
    transcript.bob_guess = bob.guess(params, &bob_state, &evidence)?;

    let unveil = match alice.unveil(params, &commit, &mut channel, &mut alice_rng) {
        Ok(u) => u,
        Err(ProtocolError::Aborted(reason)) => {
            transcript.verdict = Verdict::Abort { phase: Phase::Unveil, reason };
            return Ok(transcript);
        }
        Err(e) => return Err(e),
    };
    transcript.verdict = bob.verify(params, &mut bob_state, &mut channel, &evidence, &unveil, &mut bob_rng)?;
    transcript.unveil = Some(unveil);
    transcript.bob_secret = bob_state.secret();
    Ok(transcript)
}
