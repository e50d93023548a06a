use std::fmt;

use serde::{Deserialize, Serialize};

use super::{BasisString, BitString, Code, ProtocolError, Result};

/// Public parameters both parties agree on before a round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Photon count.
    pub n: usize,
    pub code: Code,
    /// Public parity mask, length `n`; applied to excluded strings with
    /// position `x` removed.
    pub r: BitString,
    /// Rounds per commitment.
    pub rounds: usize,
    pub master_seed: u64,
}

impl ProtocolParams {
    pub fn new(n: usize, r: BitString) -> Result<Self> {
        let params = ProtocolParams {
            n,
            code: Code::All,
            r,
            rounds: 1,
            master_seed: 0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(ProtocolError::InvalidParams(format!("n = {} < 2", self.n)));
        }
        if self.r.len() != self.n {
            return Err(ProtocolError::LengthMismatch { left: self.n, right: self.r.len() });
        }
        if self.rounds == 0 {
            return Err(ProtocolError::InvalidParams("rounds must be >= 1".into()));
        }
        Ok(())
    }
}

/// Bob's private preparation data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BobSecret {
    pub r_b: BitString,
    pub eta: BasisString,
}

/// Alice's private record after measuring and choosing the exclusion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AliceRecord {
    pub theta: BasisString,
    pub r_a: BitString,
    pub b: u8,
    pub x: usize,
}

/// The commitment evidence: the excluded position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceAnnouncement {
    pub x: usize,
}

/// Alice's opening: the bit, her claimed outcome string and her bases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnveilAnnouncement {
    pub b: u8,
    pub claimed_outcomes: BitString,
    pub theta: BasisString,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Commit,
    Unveil,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbortReason {
    /// No position satisfies the exclusion rule.
    NoValidExclusion,
    /// Every eligible exclusion leaves a non-codeword.
    CodeInfeasible,
    /// A flip-cheat found no position it could alter.
    NoFlippablePosition,
}

impl fmt::Display for AbortReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AbortReason::NoValidExclusion => "no valid exclusion",
            AbortReason::CodeInfeasible => "code-infeasible",
            AbortReason::NoFlippablePosition => "no flippable position",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Accept,
    RejectParity,
    RejectConsistency,
    Abort { phase: Phase, reason: AbortReason },
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }

    /// Aborted before the evidence announcement; such rounds are re-run.
    pub fn is_commit_abort(&self) -> bool {
        matches!(self, Verdict::Abort { phase: Phase::Commit, .. })
    }
}

/// Complete record of one protocol round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub params: ProtocolParams,
    pub round_seed: u64,
    pub alice_strategy: String,
    pub bob_strategy: String,
    pub quantum_message: String,
    pub bob_secret: Option<BobSecret>,
    pub alice_record: Option<AliceRecord>,
    pub evidence: Option<EvidenceAnnouncement>,
    pub bob_guess: Option<u8>,
    pub unveil: Option<UnveilAnnouncement>,
    pub verdict: Verdict,
}

impl Transcript {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| ProtocolError::InvalidParams(format!("transcript: {e}")))
    }
}
