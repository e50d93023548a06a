use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::protocol::{
    alice_choose_exclusion, bob_verify, exclude, measure_photons, parity, AbortReason, AliceRecord,
    BasisString, BitString, BobSecret, Code, CommitState, Committer, EvidenceAnnouncement,
    ProtocolError, ProtocolParams, QuantumChannel, Result, UnveilAnnouncement, Verdict,
};

/// Measures in random bases, commits to `bit` (or a fresh random bit per
/// round) and opens honestly.
#[derive(Debug, Clone, Copy, Default)]
pub struct HonestAlice {
    pub bit: Option<u8>,
}

/// Commits honestly to `committed_bit`, then tries to open the other bit by
/// flipping one outcome-1 position.
#[derive(Debug, Clone, Copy)]
pub struct FlipAlice {
    pub committed_bit: u8,
}

impl Default for FlipAlice {
    fn default() -> Self {
        // With b = 1 the remaining string always holds a flippable position.
        FlipAlice { committed_bit: 1 }
    }
}

/// Entanglement attacker at the protocol level: announces a random `x`
/// without measuring, decides the bit at unveiling, then measures and alters
/// one outcome if the parity disagrees. Against Bob's separable photons this
/// is the best deferral available; the steering attack proper needs an
/// entangled preparation and lives in [`crate::strategies::mlc_open`].
#[derive(Debug, Clone, Copy, Default)]
pub struct MlcAlice {
    pub target: Option<u8>,
}

fn measured_commit(
    params: &ProtocolParams,
    channel: &mut QuantumChannel,
    b: u8,
    rng: &mut ChaCha8Rng,
) -> Result<CommitState> {
    let theta = BasisString::random(params.n, rng);
    let (r_a, post) = measure_photons(&channel.joint, &channel.photons, &theta, rng)?;
    channel.joint = post;
    let x = alice_choose_exclusion(&r_a, &params.r, b, &params.code, rng)?;
    Ok(CommitState::Measured(AliceRecord { theta, r_a, b, x }))
}

fn honest_opening(state: &CommitState) -> Result<UnveilAnnouncement> {
    let record = state
        .record()
        .ok_or_else(|| ProtocolError::InvalidParams("opening requires a measured commitment".into()))?;
    Ok(UnveilAnnouncement {
        b: record.b,
        claimed_outcomes: record.r_a.clone(),
        theta: record.theta.clone(),
    })
}

impl Committer for HonestAlice {
    fn id(&self) -> &'static str {
        "honest_alice"
    }

    fn commit(&self, params: &ProtocolParams, channel: &mut QuantumChannel, rng: &mut ChaCha8Rng) -> Result<CommitState> {
        let b = self.bit.unwrap_or_else(|| rng.random_range(0..2));
        measured_commit(params, channel, b, rng)
    }

    fn unveil(&self, _: &ProtocolParams, state: &CommitState, _: &mut QuantumChannel, _: &mut ChaCha8Rng) -> Result<UnveilAnnouncement> {
        honest_opening(state)
    }
}

impl Committer for FlipAlice {
    fn id(&self) -> &'static str {
        "flip_alice"
    }

    fn commit(&self, params: &ProtocolParams, channel: &mut QuantumChannel, rng: &mut ChaCha8Rng) -> Result<CommitState> {
        measured_commit(params, channel, self.committed_bit, rng)
    }

    fn unveil(&self, params: &ProtocolParams, state: &CommitState, _: &mut QuantumChannel, rng: &mut ChaCha8Rng) -> Result<UnveilAnnouncement> {
        let record = state
            .record()
            .ok_or_else(|| ProtocolError::InvalidParams("flip cheat requires a measured commitment".into()))?;
        flip_cheat_unveil(record, &params.r, 1 - record.b, rng)
    }
}

/// Positions Alice can flip from 1 to 0 to change the parity.
fn flippable(outcomes: &BitString, r: &BitString, x: usize) -> Vec<usize> {
    (0..outcomes.len())
        .filter(|&i| i != x && outcomes.get(i) == 1 && r.get(i) == 1)
        .collect()
}

/// Opens `target_b` by flipping one uniformly chosen position with
/// `R_A(i) = 1`, `r(i) = 1`, `i != x` to 0. Bases are announced honestly.
pub fn flip_cheat_unveil<R: Rng + ?Sized>(
    record: &AliceRecord,
    r: &BitString,
    target_b: u8,
    rng: &mut R,
) -> Result<UnveilAnnouncement> {
    if target_b == record.b {
        return Err(ProtocolError::InvalidParams("flip cheat targets the committed bit".into()));
    }
    if r.len() != record.r_a.len() {
        return Err(ProtocolError::LengthMismatch { left: record.r_a.len(), right: r.len() });
    }
    let positions = flippable(&record.r_a, r, record.x);
    if positions.is_empty() {
        return Err(ProtocolError::Aborted(AbortReason::NoFlippablePosition));
    }
    let i = positions[rng.random_range(0..positions.len())];
    let mut claimed = record.r_a.clone();
    claimed.set(i, 0);
    Ok(UnveilAnnouncement {
        b: target_b,
        claimed_outcomes: claimed,
        theta: record.theta.clone(),
    })
}

impl Committer for MlcAlice {
    fn id(&self) -> &'static str {
        "mlc_alice"
    }

    fn commit(&self, params: &ProtocolParams, _: &mut QuantumChannel, rng: &mut ChaCha8Rng) -> Result<CommitState> {
        Ok(CommitState::Deferred { x: rng.random_range(0..params.n) })
    }

    fn unveil(&self, params: &ProtocolParams, state: &CommitState, channel: &mut QuantumChannel, rng: &mut ChaCha8Rng) -> Result<UnveilAnnouncement> {
        let x = state.x();
        let b = self.target.unwrap_or_else(|| rng.random_range(0..2));
        let theta = BasisString::random(params.n, rng);
        let (r_a, post) = measure_photons(&channel.joint, &channel.photons, &theta, rng)?;
        channel.joint = post;
        let mut claimed = r_a.clone();
        let current = parity(&params.r.exclude(x)?, &r_a.exclude(x)?)?;
        if current != b {
            let positions = flippable(&r_a, &params.r, x);
            if positions.is_empty() {
                return Err(ProtocolError::Aborted(AbortReason::NoFlippablePosition));
            }
            claimed.set(positions[rng.random_range(0..positions.len())], 0);
        }
        Ok(UnveilAnnouncement { b, claimed_outcomes: claimed, theta })
    }
}

/// How a deferring Alice alters one claimed position at unveiling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alteration {
    /// Announce the opposite outcome in the basis actually measured.
    FlipOutcome,
    /// Announce the conjugate basis together with the opposite outcome.
    SwitchBasis,
}

/// Exact detection statistics for a single altered position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionStats {
    /// Probability Bob rejects on consistency.
    pub detection: f64,
    /// Number of weighted configurations enumerated.
    pub configurations: u64,
}

/// Exhaustive check of what Bob's consistency test catches when Alice, after
/// deferring her measurement of a separable preparation, alters exactly one
/// non-excluded position.
///
/// Enumerates `R_B`, `η`, `θ`, Born-weighted outcomes, the excluded position
/// and the altered position; the announced bit is set so the parity check
/// passes, isolating the consistency test. Verdicts come from [`bob_verify`].
pub fn deferral_detection(n: usize, alteration: Alteration) -> Result<DetectionStats> {
    const MAX: usize = 6;
    if !(2..=MAX).contains(&n) {
        return Err(ProtocolError::SizeLimit { what: "deferral enumeration", n, max: MAX });
    }
    let r = BitString::ones(n);
    let full = (1u64 << n) - 1;
    // Integer weights in units of 2^{-n}: each outcome string carries
    // 2^{n - |mismatch|}; x and i are uniform, so their factor cancels.
    let (mut detected, mut total) = (0u64, 0u64);
    let mut configurations = 0u64;
    for rb_mask in 0..=full {
        let r_b = BitString::from_mask(rb_mask, n);
        for eta_mask in 0..=full {
            let eta = BasisString::from_mask(eta_mask, n);
            let secret = BobSecret { r_b: r_b.clone(), eta };
            for theta_mask in 0..=full {
                let mism = theta_mask ^ eta_mask;
                let w = 1u64 << (n - mism.count_ones() as usize);
                let mut sub = mism;
                loop {
                    let r_a = BitString::from_mask((rb_mask & !mism) | sub, n);
                    for x in 0..n {
                        for i in (0..n).filter(|&i| i != x) {
                            let mut claimed = r_a.clone();
                            claimed.set(i, 1 - r_a.get(i));
                            let mut theta = BasisString::from_mask(theta_mask, n);
                            if alteration == Alteration::SwitchBasis {
                                theta.set(i, theta.get(i).conjugate());
                            }
                            let b = parity(&r.exclude(x)?, &BitString::new(exclude(claimed.bits(), x)?)?)?;
                            let unveil = UnveilAnnouncement { b, claimed_outcomes: claimed, theta };
                            let verdict = bob_verify(&secret, &EvidenceAnnouncement { x }, &unveil, &r, &Code::All)?;
                            total += w;
                            configurations += 1;
                            if verdict == Verdict::RejectConsistency {
                                detected += w;
                            }
                        }
                    }
                    if sub == 0 {
                        break;
                    }
                    sub = (sub - 1) & mism;
                }
            }
        }
    }
    Ok(DetectionStats { detection: detected as f64 / total as f64, configurations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::Basis;
    use rand::SeedableRng;

    fn record(r_a: &str, b: u8, x: usize) -> AliceRecord {
        AliceRecord {
            theta: BasisString::uniform(r_a.len(), Basis::Rectilinear),
            r_a: r_a.parse().unwrap(),
            b,
            x,
        }
    }

    #[test]
    fn flip_changes_one_eligible_position() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r: BitString = "1101".parse().unwrap();
        // Eligible: R_A(i) = 1, r(i) = 1, i != x=0 -> {1}.
        for _ in 0..20 {
            let u = flip_cheat_unveil(&record("1110", 1, 0), &r, 0, &mut rng).unwrap();
            assert_eq!(u.claimed_outcomes.to_string(), "1010");
            assert_eq!(u.b, 0);
        }
    }

    #[test]
    fn flip_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = BitString::ones(4);
        assert!(matches!(
            flip_cheat_unveil(&record("1000", 1, 1), &r, 1, &mut rng),
            Err(ProtocolError::InvalidParams(_))
        ));
        assert_eq!(
            flip_cheat_unveil(&record("1000", 1, 0), &r, 0, &mut rng),
            Err(ProtocolError::Aborted(AbortReason::NoFlippablePosition))
        );
    }

    #[test]
    fn outcome_flips_are_caught_half_the_time() {
        let stats = deferral_detection(4, Alteration::FlipOutcome).unwrap();
        assert!((stats.detection - 0.5).abs() < 1e-12, "{stats:?}");
    }

    #[test]
    fn basis_switching_is_caught_a_quarter_of_the_time() {
        let stats = deferral_detection(3, Alteration::SwitchBasis).unwrap();
        assert!((stats.detection - 0.25).abs() < 1e-12, "{stats:?}");
    }
}
