use proptest::prelude::*;

use revqbc::protocol::{
    bob_verify, exclusion_candidates, parity, run_round, BasisString, BitString, BobSecret, Code,
    EvidenceAnnouncement, ProtocolParams, Transcript, UnveilAnnouncement, Verdict,
};
use revqbc::quantum::Basis;
use revqbc::strategies::{
    committer_from_id, deferral_detection, Alteration, EprBob, FlipAlice, GuessBob, HonestAlice, HonestBob,
    MlcAlice,
};

fn params(n: usize, r: &str) -> ProtocolParams {
    ProtocolParams::new(n, r.parse().unwrap()).unwrap()
}

#[test]
fn honest_rounds_accept_or_abort_at_commit() {
    let p = params(8, "11111111");
    let mut accepted = 0;
    for seed in 0..500 {
        let t = run_round(&HonestAlice::default(), &HonestBob, &p, seed).unwrap();
        assert!(t.verdict.is_accept() || t.verdict.is_commit_abort(), "seed {seed}: {:?}", t.verdict);
        accepted += t.verdict.is_accept() as usize;
    }
    assert!(accepted > 450);
}

#[test]
fn honest_alice_commits_requested_bit() {
    let p = params(6, "110110");
    for b in 0..2u8 {
        for seed in 0..50 {
            let t = run_round(&HonestAlice { bit: Some(b) }, &HonestBob, &p, seed).unwrap();
            if let Some(unveil) = &t.unveil {
                assert_eq!(unveil.b, b);
                let x = t.evidence.unwrap().x;
                let rest = unveil.claimed_outcomes.exclude(x).unwrap();
                assert_eq!(parity(&p.r.exclude(x).unwrap(), &rest).unwrap(), b);
            }
        }
    }
}

#[test]
fn transcript_json_round_trips_with_named_fields() {
    let t = run_round(&HonestAlice::default(), &HonestBob, &params(5, "10111"), 42).unwrap();
    let json = t.to_json();
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    for field in ["params", "bob_secret", "evidence", "unveil", "verdict", "round_seed"] {
        assert!(value.get(field).is_some(), "missing {field}");
    }
    assert_eq!(Transcript::from_json(&json).unwrap(), t);
}

#[test]
fn rounds_replay_from_their_seed() {
    let p = params(6, "111111");
    for id in ["honest_alice", "flip_alice", "mlc_alice"] {
        let alice = committer_from_id(id).unwrap();
        for seed in [0u64, 7, u64::MAX] {
            let a = run_round(alice.as_ref(), &HonestBob, &p, seed).unwrap();
            let b = run_round(alice.as_ref(), &HonestBob, &p, seed).unwrap();
            assert_eq!(a.to_json(), b.to_json());
        }
    }
}

#[test]
fn flip_cheat_is_caught_only_at_matched_bases() {
    let p = params(6, "111111");
    let (mut matched, mut caught_matched, mut mismatched_caught) = (0, 0, 0);
    for seed in 0..2000 {
        let t = run_round(&FlipAlice::default(), &HonestBob, &p, seed).unwrap();
        let (Some(record), Some(unveil), Some(secret)) = (&t.alice_record, &t.unveil, &t.bob_secret) else {
            continue;
        };
        assert_eq!(record.b, 1);
        assert_eq!(unveil.b, 0);
        let diff: Vec<usize> = (0..6).filter(|&i| record.r_a.get(i) != unveil.claimed_outcomes.get(i)).collect();
        assert_eq!(diff.len(), 1);
        let i = diff[0];
        assert_ne!(i, record.x);
        assert_ne!(t.verdict, Verdict::RejectParity);
        if secret.eta.get(i) == record.theta.get(i) {
            matched += 1;
            caught_matched += (t.verdict == Verdict::RejectConsistency) as usize;
        } else {
            mismatched_caught += (t.verdict == Verdict::RejectConsistency) as usize;
        }
    }
    assert!(matched > 0);
    assert_eq!(caught_matched, matched);
    assert_eq!(mismatched_caught, 0);
}

/// At n = 4, every mismatched-basis single flip that restores parity passes
/// verification.
#[test]
fn mismatched_flip_always_passes_at_n4() {
    let n = 4;
    let r = BitString::ones(n);
    for rb in 0..16u64 {
        for ra in 0..16u64 {
            for mism in 0..16u64 {
                if (ra ^ rb) & !mism & 0xF != 0 {
                    continue;
                }
                let r_a = BitString::from_mask(ra, n);
                let secret = BobSecret { r_b: BitString::from_mask(rb, n), eta: BasisString::uniform(n, Basis::Rectilinear) };
                let theta = BasisString::from_mask(mism, n);
                for x in exclusion_candidates(&r_a, &r, 1).unwrap() {
                    for i in (0..n).filter(|&i| i != x && mism >> i & 1 == 1 && ra >> i & 1 == 1) {
                        let mut claimed = r_a.clone();
                        claimed.set(i, 0);
                        let unveil = UnveilAnnouncement { b: 0, claimed_outcomes: claimed, theta: theta.clone() };
                        let verdict =
                            bob_verify(&secret, &EvidenceAnnouncement { x }, &unveil, &r, &Code::default()).unwrap();
                        assert_eq!(verdict, Verdict::Accept, "rb={rb:04b} ra={ra:04b} mism={mism:04b} x={x} i={i}");
                    }
                }
            }
        }
    }
}

#[test]
fn epr_bob_is_indistinguishable_to_honest_alice() {
    let p = params(4, "1111");
    for seed in 0..200 {
        let t = run_round(&HonestAlice::default(), &EprBob, &p, seed).unwrap();
        assert!(t.verdict.is_accept() || t.verdict.is_commit_abort(), "seed {seed}: {:?}", t.verdict);
        assert!(t.quantum_message.to_lowercase().contains("epr"), "{}", t.quantum_message);
    }
}

#[test]
fn epr_bob_rejects_oversized_rounds() {
    assert!(run_round(&HonestAlice::default(), &EprBob, &params(8, "11111111"), 0).is_err());
}

#[test]
fn guess_bob_records_a_guess() {
    let t = run_round(&HonestAlice::default(), &GuessBob::default(), &params(6, "011011"), 9).unwrap();
    if t.evidence.is_some() {
        assert!(matches!(t.bob_guess, Some(0 | 1)));
    }
}

#[test]
fn deferring_alice_is_caught_against_separable_photons() {
    let p = params(6, "111111");
    let (mut rounds, mut rejected) = (0, 0);
    for seed in 0..2000 {
        let t = run_round(&MlcAlice { target: Some(0) }, &HonestBob, &p, seed).unwrap();
        if t.unveil.is_some() {
            rounds += 1;
            rejected += !t.verdict.is_accept() as usize;
        }
    }
    assert!(rejected as f64 / rounds as f64 > 0.2, "{rejected}/{rounds}");
}

#[test]
fn deferral_detection_values() {
    assert_eq!(deferral_detection(4, Alteration::FlipOutcome).unwrap().detection, 0.5);
    assert_eq!(deferral_detection(4, Alteration::SwitchBasis).unwrap().detection, 0.25);
    assert!(deferral_detection(7, Alteration::FlipOutcome).is_err());
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(ProtocolParams::new(4, "111".parse().unwrap()).is_err());
    assert!("10a1".parse::<BitString>().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    /// Honest parties never reject, for any public mask.
    #[test]
    fn honest_never_rejects(seed in any::<u64>(), n in 2usize..=10, mask in any::<u64>()) {
        let p = ProtocolParams::new(n, BitString::from_mask(mask, n)).unwrap();
        let t = run_round(&HonestAlice::default(), &HonestBob, &p, seed).unwrap();
        prop_assert!(t.verdict.is_accept() || t.verdict.is_commit_abort());
    }

    /// The exclusion candidates are exactly the positions leaving parity `b`.
    #[test]
    fn exclusion_candidates_fix_parity(n in 2usize..=12, ra in any::<u64>(), r in any::<u64>(), b in 0u8..2) {
        let (ra, r) = (BitString::from_mask(ra, n), BitString::from_mask(r, n));
        let xs = exclusion_candidates(&ra, &r, b).unwrap();
        for x in 0..n {
            let p = parity(&r.exclude(x).unwrap(), &ra.exclude(x).unwrap()).unwrap();
            prop_assert_eq!(xs.contains(&x), p == b);
        }
    }
}
