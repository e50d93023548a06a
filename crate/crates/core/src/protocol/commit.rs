use rand::Rng;

use super::{
    parity, AbortReason, BasisString, BitString, BobSecret, Code, EvidenceAnnouncement,
    ProtocolError, ProtocolParams, Result, UnveilAnnouncement, Verdict,
};
use crate::quantum::{measure_qubit, prepare_bb84, tensor, StateVector, MAX_QUBITS};

/// Bob draws `R_B` and `η` uniformly and prepares `|R_B>_η` as a product state.
pub fn bob_prepare<R: Rng + ?Sized>(params: &ProtocolParams, rng: &mut R) -> Result<(BobSecret, StateVector)> {
    let r_b = BitString::random(params.n, rng);
    let eta = BasisString::random(params.n, rng);
    let state = prepare_product(&r_b, &eta)?;
    Ok((BobSecret { r_b, eta }, state))
}

/// `|s(0)>_{bases(0)} ⊗ ... ⊗ |s(n-1)>_{bases(n-1)}`.
pub fn prepare_product(bits: &BitString, bases: &BasisString) -> Result<StateVector> {
    if bits.len() != bases.len() {
        return Err(ProtocolError::LengthMismatch { left: bits.len(), right: bases.len() });
    }
    if bits.is_empty() || bits.len() > MAX_QUBITS {
        return Err(ProtocolError::InvalidParams(format!("{} photons", bits.len())));
    }
    let mut state = prepare_bb84(bits.get(0), bases.get(0));
    for i in 1..bits.len() {
        state = tensor(&state, &prepare_bb84(bits.get(i), bases.get(i)))?;
    }
    Ok(state)
}

/// Measures `qubits[i]` of `state` in `theta(i)`, in order. Returns the
/// outcome string and the collapsed state.
pub fn measure_photons<R: Rng + ?Sized>(
    state: &StateVector,
    qubits: &[usize],
    theta: &BasisString,
    rng: &mut R,
) -> Result<(BitString, StateVector)> {
    if qubits.len() != theta.len() {
        return Err(ProtocolError::LengthMismatch { left: qubits.len(), right: theta.len() });
    }
    let mut current = state.clone();
    let mut outcomes = Vec::with_capacity(qubits.len());
    for (&q, &basis) in qubits.iter().zip(theta.bases()) {
        let (o, post) = measure_qubit(&current, q, basis, rng.random::<f64>())?;
        outcomes.push(o);
        current = post;
    }
    Ok((BitString::new(outcomes)?, current))
}

/// Alice measures every photon of `state` in the bases `theta`.
pub fn alice_measure<R: Rng + ?Sized>(state: &StateVector, theta: &BasisString, rng: &mut R) -> Result<BitString> {
    if theta.len() != state.num_qubits() {
        return Err(ProtocolError::LengthMismatch { left: state.num_qubits(), right: theta.len() });
    }
    let qubits: Vec<usize> = (0..theta.len()).collect();
    Ok(measure_photons(state, &qubits, theta, rng)?.0)
}

/// Positions Alice may exclude to commit to `b`, before code filtering.
///
/// If the parity already equals `b`, any position with `R_A(i) r(i) = 0`
/// keeps it; else a position with `R_A(i) r(i) = 1` flips it.
pub fn exclusion_candidates(r_a: &BitString, r: &BitString, b: u8) -> Result<Vec<usize>> {
    let keep = parity(r, r_a)? == b;
    Ok((0..r_a.len())
        .filter(|&i| (r_a.get(i) & r.get(i) == 1) != keep)
        .collect())
}

/// Chooses the excluded position uniformly among the valid candidates.
///
/// Fails with [`ProtocolError::Aborted`] when no candidate exists or none
/// leaves a codeword.
pub fn alice_choose_exclusion<R: Rng + ?Sized>(
    r_a: &BitString,
    r: &BitString,
    b: u8,
    code: &Code,
    rng: &mut R,
) -> Result<usize> {
    let candidates = exclusion_candidates(r_a, r, b)?;
    if candidates.is_empty() {
        return Err(ProtocolError::Aborted(AbortReason::NoValidExclusion));
    }
    let valid: Vec<usize> = if code.is_trivial() {
        candidates
    } else {
        candidates
            .into_iter()
            .filter(|&x| r_a.exclude(x).map(|w| code.contains(&w)).unwrap_or(false))
            .collect()
    };
    if valid.is_empty() {
        return Err(ProtocolError::Aborted(AbortReason::CodeInfeasible));
    }
    Ok(valid[rng.random_range(0..valid.len())])
}

/// Bob's unveiling checks.
///
/// Consistency is inspected first: at every `i != x` where the announced
/// basis matches `η(i)`, the claimed outcome must equal `R_B(i)`. Then the
/// excluded claimed string must be a codeword with parity `b` under the
/// excluded `r`.
pub fn bob_verify(
    secret: &BobSecret,
    evidence: &EvidenceAnnouncement,
    unveil: &UnveilAnnouncement,
    r: &BitString,
    code: &Code,
) -> Result<Verdict> {
    let n = secret.r_b.len();
    for len in [secret.eta.len(), unveil.claimed_outcomes.len(), unveil.theta.len(), r.len()] {
        if len != n {
            return Err(ProtocolError::LengthMismatch { left: n, right: len });
        }
    }
    let x = evidence.x;
    if x >= n {
        return Err(ProtocolError::IndexOutOfRange { index: x, len: n });
    }
    let consistent = (0..n)
        .filter(|&i| i != x && secret.eta.get(i) == unveil.theta.get(i))
        .all(|i| unveil.claimed_outcomes.get(i) == secret.r_b.get(i));
    if !consistent {
        return Ok(Verdict::RejectConsistency);
    }
    let claimed = unveil.claimed_outcomes.exclude(x)?;
    if !code.contains(&claimed) || parity(&r.exclude(x)?, &claimed)? != unveil.b {
        return Ok(Verdict::RejectParity);
    }
    Ok(Verdict::Accept)
}
