use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mlc::epr_pairs;
use crate::protocol::{
    bob_prepare, bob_verify, measure_photons, parity, Acceptor, BasisString, BitString, BobState,
    Code, EvidenceAnnouncement, ProtocolError, ProtocolParams, QuantumChannel, Result,
    UnveilAnnouncement, Verdict,
};

/// Largest `n` for which the exact posterior is enumerated.
pub const EXACT_POSTERIOR_MAX_N: usize = 10;

/// Prepares the separable BB84 string and verifies honestly.
#[derive(Debug, Clone, Copy, Default)]
pub struct HonestBob;

/// Honest preparation and verification, plus a guess of `b` made right
/// after the evidence announcement.
#[derive(Debug, Clone, Copy, Default)]
pub struct GuessBob {
    /// `None` picks [`GuessMode::for_n`].
    pub mode: Option<GuessMode>,
}

/// Sends Alice halves of EPR pairs and keeps the twins. Measuring the twins in
/// `η` at verification time yields an `R_B` to check against.
#[derive(Debug, Clone, Copy, Default)]
pub struct EprBob;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuessMode {
    /// Parity of Bob's own string over the non-excluded positions.
    ParityProxy,
    /// Maximum a posteriori bit by exhaustive enumeration.
    ExactPosterior,
}

impl GuessMode {
    pub fn for_n(n: usize) -> GuessMode {
        if n <= EXACT_POSTERIOR_MAX_N {
            GuessMode::ExactPosterior
        } else {
            GuessMode::ParityProxy
        }
    }
}

/// Everything Bob knows before the unveiling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BobView {
    pub r_b: BitString,
    pub eta: BasisString,
    pub r: BitString,
    pub x: usize,
}

impl Acceptor for HonestBob {
    fn id(&self) -> &'static str {
        "honest_bob"
    }

    fn prepare(&self, params: &ProtocolParams, rng: &mut ChaCha8Rng) -> Result<(BobState, QuantumChannel)> {
        let (secret, state) = bob_prepare(params, rng)?;
        Ok((BobState { eta: secret.eta, r_b: Some(secret.r_b) }, QuantumChannel::separable(state)))
    }

    fn verify(
        &self,
        params: &ProtocolParams,
        state: &mut BobState,
        _: &mut QuantumChannel,
        evidence: &EvidenceAnnouncement,
        unveil: &UnveilAnnouncement,
        _: &mut ChaCha8Rng,
    ) -> Result<Verdict> {
        let secret = state.secret().ok_or_else(|| ProtocolError::InvalidParams("missing R_B".into()))?;
        bob_verify(&secret, evidence, unveil, &params.r, &params.code)
    }
}

impl Acceptor for GuessBob {
    fn id(&self) -> &'static str {
        "guess_bob"
    }

    fn prepare(&self, params: &ProtocolParams, rng: &mut ChaCha8Rng) -> Result<(BobState, QuantumChannel)> {
        HonestBob.prepare(params, rng)
    }

    fn guess(&self, params: &ProtocolParams, state: &BobState, evidence: &EvidenceAnnouncement) -> Result<Option<u8>> {
        let r_b = state.r_b.clone().ok_or_else(|| ProtocolError::InvalidParams("missing R_B".into()))?;
        let view = BobView { r_b, eta: state.eta.clone(), r: params.r.clone(), x: evidence.x };
        let mode = self.mode.unwrap_or_else(|| GuessMode::for_n(params.n));
        guess_commitment(&view, &params.code, mode).map(Some)
    }

    fn verify(
        &self,
        params: &ProtocolParams,
        state: &mut BobState,
        channel: &mut QuantumChannel,
        evidence: &EvidenceAnnouncement,
        unveil: &UnveilAnnouncement,
        rng: &mut ChaCha8Rng,
    ) -> Result<Verdict> {
        HonestBob.verify(params, state, channel, evidence, unveil, rng)
    }
}

/// Largest `n` for a full EPR preparation (two qubits per photon).
pub const EPR_BOB_MAX_N: usize = 6;

impl Acceptor for EprBob {
    fn id(&self) -> &'static str {
        "epr_bob"
    }

    fn prepare(&self, params: &ProtocolParams, rng: &mut ChaCha8Rng) -> Result<(BobState, QuantumChannel)> {
        let n = params.n;
        if n > EPR_BOB_MAX_N {
            return Err(ProtocolError::SizeLimit { what: "epr_bob", n, max: EPR_BOB_MAX_N });
        }
        let joint = epr_pairs(n)?;
        let eta = BasisString::random(n, rng);
        let channel = QuantumChannel {
            joint,
            photons: (0..n).collect(),
            hidden: (n..2 * n).collect(),
            description: format!("{n} EPR pairs, twins retained by Bob"),
        };
        Ok((BobState { eta, r_b: None }, channel))
    }

    fn verify(
        &self,
        params: &ProtocolParams,
        state: &mut BobState,
        channel: &mut QuantumChannel,
        evidence: &EvidenceAnnouncement,
        unveil: &UnveilAnnouncement,
        rng: &mut ChaCha8Rng,
    ) -> Result<Verdict> {
        let (r_b, post) = measure_photons(&channel.joint, &channel.hidden, &state.eta, rng)?;
        channel.joint = post;
        state.r_b = Some(r_b);
        HonestBob.verify(params, state, channel, evidence, unveil, rng)
    }
}

/// Bob's guess of the committed bit.
///
/// `ExactPosterior` weighs every basis string `θ` and every outcome on the
/// positions where `θ` differs from `η` by its Born probability, and every
/// bit by Alice's exclusion rule producing the observed `x`; ties fall back
/// to the parity proxy.
pub fn guess_commitment(view: &BobView, code: &Code, mode: GuessMode) -> Result<u8> {
    let n = view.r_b.len();
    if view.eta.len() != n || view.r.len() != n {
        return Err(ProtocolError::LengthMismatch { left: n, right: view.eta.len().max(view.r.len()) });
    }
    if view.x >= n {
        return Err(ProtocolError::IndexOutOfRange { index: view.x, len: n });
    }
    let proxy = parity(&view.r.exclude(view.x)?, &view.r_b.exclude(view.x)?)?;
    match mode {
        GuessMode::ParityProxy => Ok(proxy),
        GuessMode::ExactPosterior => {
            let [p0, p1] = commitment_posterior(view, code)?;
            Ok(if p0 > p1 {
                0
            } else if p1 > p0 {
                1
            } else {
                proxy
            })
        }
    }
}

/// Unnormalized joint weights `P(view, b)` for `b = 0, 1`, with a uniform
/// prior on `b`.
pub fn commitment_posterior(view: &BobView, code: &Code) -> Result<[f64; 2]> {
    let n = view.r_b.len();
    if n > EXACT_POSTERIOR_MAX_N {
        return Err(ProtocolError::SizeLimit { what: "exact posterior", n, max: EXACT_POSTERIOR_MAX_N });
    }
    let full = (1u64 << n) - 1;
    let (rb, r, x_bit) = (view.r_b.to_mask(), view.r.to_mask(), 1u64 << view.x);
    let mut weight = [0.0f64; 2];
    // θ ranges over all strings; only the mismatch pattern θ ⊕ η matters.
    for mism in 0..=full {
        let w_outcome = 0.5f64.powi(mism.count_ones() as i32);
        let mut sub = mism;
        loop {
            let ra = (rb & !mism) | sub;
            for b in 0..2u8 {
                let cand = candidate_mask(ra, r, b, full);
                if cand & x_bit == 0 {
                    continue;
                }
                let size = if code.is_trivial() {
                    cand.count_ones()
                } else {
                    let word = BitString::from_mask(ra, n);
                    let valid = (0..n)
                        .filter(|&i| cand >> i & 1 == 1)
                        .filter(|&i| word.exclude(i).map(|w| code.contains(&w)).unwrap_or(false))
                        .collect::<Vec<_>>();
                    if !valid.contains(&view.x) {
                        continue;
                    }
                    valid.len() as u32
                };
                weight[b as usize] += w_outcome / size as f64;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & mism;
        }
    }
    Ok(weight)
}

/// Exclusion candidates as a bit mask (bit `i` = position `i`).
fn candidate_mask(ra: u64, r: u64, b: u8, full: u64) -> u64 {
    let par = ((r & ra).count_ones() & 1) as u8;
    if par == b {
        !(ra & r) & full
    } else {
        ra & r
    }
}
