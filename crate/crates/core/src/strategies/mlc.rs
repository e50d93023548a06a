//! The entanglement steering attack against an EPR-preparing Bob.
//!
//! Bob hands Alice one half of each of `n` EPR pairs. Alice excludes one
//! pair; the remaining `2(n-1)` qubits hold `2^{-(n-1)/2} Σ_j |j>_A |j>_B`.
//! She appends an ancilla `C` of `n-2` qubits so that `dim(C ⊗ A) = N =
//! 2^{n-1}·2^{n-2}`, then measures `CA` in a steering basis chosen after the
//! fact for whichever bit she wants to open, leaving Bob's register in a
//! member of the matching ensemble.
//!
//! Held-state qubit layout: `C = 0..n-2`, `A = n-2..2n-3`, `B = 2n-3..3n-4`.

use rand::Rng;

use crate::protocol::{ProtocolError, Result};
use crate::quantum::{
    measure_in_basis, partial_trace, steering_basis, tensor, trace_distance, Basis, DensityMatrix,
    Ensemble, QuantumError, StateVector, SteeringBasis, C64, SYNTHESIS_TOL,
};

pub const EPR_PREPARE_MAX_N: usize = 7;
pub const MLC_MAX_N: usize = 5;

/// `k` EPR pairs `2^{-k/2} Σ_j |j>|j>`, first register on qubits `0..k`.
pub fn epr_pairs(k: usize) -> Result<StateVector> {
    if k == 0 || 2 * k > crate::quantum::MAX_QUBITS {
        return Err(ProtocolError::SizeLimit { what: "epr pairs", n: k, max: crate::quantum::MAX_QUBITS / 2 });
    }
    let dim = 1usize << k;
    let amp = C64::new((dim as f64).sqrt().recip(), 0.0);
    let mut amps = vec![C64::new(0.0, 0.0); dim * dim];
    for j in 0..dim {
        amps[(j << k) | j] = amp;
    }
    Ok(StateVector::new(amps)?)
}

/// Bob's entangled preparation after Alice's random exclusion.
#[derive(Debug, Clone, PartialEq)]
pub struct EprPreparation {
    pub n: usize,
    /// Index of the discarded pair.
    pub excluded: usize,
    /// `2(n-1)` qubits: Alice's halves on `0..n-1`, Bob's twins on `n-1..2n-2`.
    pub state: StateVector,
}

impl EprPreparation {
    pub fn alice_qubits(&self) -> Vec<usize> {
        (0..self.n - 1).collect()
    }

    pub fn bob_qubits(&self) -> Vec<usize> {
        (self.n - 1..2 * (self.n - 1)).collect()
    }

    pub fn description(&self) -> String {
        format!(
            "{} EPR pairs (pair {} excluded), {} kept by Alice, twins held by Bob",
            self.n,
            self.excluded,
            self.n - 1
        )
    }
}

/// `n` EPR pairs with one chosen uniformly at random and discarded. Each pair
/// is a product factor, so discarding it leaves a pure state.
pub fn epr_bob_prepare<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<EprPreparation> {
    if !(2..=EPR_PREPARE_MAX_N).contains(&n) {
        return Err(ProtocolError::SizeLimit { what: "epr_bob_prepare", n, max: EPR_PREPARE_MAX_N });
    }
    let excluded = rng.random_range(0..n);
    Ok(EprPreparation { n, excluded, state: epr_pairs(n - 1)? })
}

/// Everything Alice fixes in advance for the steering attack.
#[derive(Debug, Clone, PartialEq)]
pub struct MlcPlan {
    pub n: usize,
    /// Target ensembles on Bob's register for opening 0 and 1.
    pub ensembles: [Ensemble; 2],
}

impl MlcPlan {
    /// `N = 2^{n-1}·2^{n-2}`.
    pub fn local_dim(&self) -> usize {
        1 << (2 * self.n - 3)
    }

    pub fn ancilla_qubits(&self) -> usize {
        self.n - 2
    }

    pub fn ancilla_dim(&self) -> usize {
        1 << self.ancilla_qubits()
    }

    pub fn held_qubits(&self) -> usize {
        3 * self.n - 4
    }

    pub fn local_qubits(&self) -> Vec<usize> {
        (0..2 * self.n - 3).collect()
    }

    pub fn bob_qubits(&self) -> Vec<usize> {
        (2 * self.n - 3..3 * self.n - 4).collect()
    }

    /// `|0>_C ⊗ |Φ>_AB`.
    pub fn held_state(&self, prep: &EprPreparation) -> Result<StateVector> {
        if prep.n != self.n {
            return Err(ProtocolError::LengthMismatch { left: self.n, right: prep.n });
        }
        if self.ancilla_qubits() == 0 {
            return Ok(prep.state.clone());
        }
        let ancilla = StateVector::basis_state(self.ancilla_qubits(), 0)?;
        Ok(tensor(&ancilla, &prep.state)?)
    }

    /// Steering basis on `CA` for opening `b` from `held`.
    pub fn steering_basis(&self, held: &StateVector, b: u8) -> Result<SteeringBasis> {
        Ok(steering_basis(held, &self.local_qubits(), &self.ensembles[(b & 1) as usize])?)
    }
}

/// Default ensembles: uniform rectilinear strings for 0, diagonal for 1.
pub fn default_ensembles(n: usize) -> Result<[Ensemble; 2]> {
    if n < 2 {
        return Err(ProtocolError::SizeLimit { what: "mlc", n, max: MLC_MAX_N });
    }
    Ok([
        Ensemble::uniform_product(n - 1, Basis::Rectilinear)?,
        Ensemble::uniform_product(n - 1, Basis::Diagonal)?,
    ])
}

/// Validates both targets against Bob's reduced state `I / 2^{n-1}`.
pub fn mlc_build_plan(n: usize, ensemble0: Ensemble, ensemble1: Ensemble) -> Result<MlcPlan> {
    if !(2..=MLC_MAX_N).contains(&n) {
        return Err(ProtocolError::SizeLimit { what: "mlc", n, max: MLC_MAX_N });
    }
    let plan = MlcPlan { n, ensembles: [ensemble0, ensemble1] };
    let bob_dim = 1usize << (n - 1);
    let reduced = DensityMatrix::maximally_mixed(bob_dim);
    for ensemble in &plan.ensembles {
        if ensemble.dim() != bob_dim {
            return Err(QuantumError::DimensionMismatch { left: bob_dim, right: ensemble.dim() }.into());
        }
        if ensemble.len() > plan.local_dim() {
            return Err(QuantumError::InvalidEnsemble(format!(
                "{} members exceed N = {}",
                ensemble.len(),
                plan.local_dim()
            ))
            .into());
        }
        let deviation = trace_distance(&ensemble.mixture(), &reduced)?;
        if deviation > SYNTHESIS_TOL {
            return Err(QuantumError::SteeringInfeasible { deviation }.into());
        }
    }
    Ok(plan)
}

/// Result of one steered opening.
#[derive(Debug, Clone, PartialEq)]
pub struct MlcOpening {
    pub b: u8,
    /// Index of the ensemble member Bob's register was steered into.
    pub outcome: usize,
    pub bob_state: DensityMatrix,
    /// `<ψ_j|ρ_B|ψ_j>` against the declared member.
    pub fidelity: f64,
}

/// Opens `chosen_b` from `held`: build the steering basis, measure `CA` in it
/// and report Bob's collapsed register.
pub fn mlc_open<R: Rng + ?Sized>(plan: &MlcPlan, held: &StateVector, chosen_b: u8, rng: &mut R) -> Result<MlcOpening> {
    if held.num_qubits() != plan.held_qubits() {
        return Err(QuantumError::DimensionMismatch { left: plan.held_qubits(), right: held.num_qubits() }.into());
    }
    let b = chosen_b & 1;
    let basis = plan.steering_basis(held, b)?;
    let (outcome, post) = measure_in_basis(held, &plan.local_qubits(), &basis, rng.random::<f64>())?;
    let ensemble = &plan.ensembles[b as usize];
    let target = ensemble
        .members()
        .get(outcome)
        .map(|(_, s)| s)
        .ok_or(QuantumError::ZeroProbabilityBranch)?;
    let bob_state = partial_trace(&post, &plan.bob_qubits())?;
    let fidelity = bob_state.fidelity_with_pure(target)?;
    Ok(MlcOpening { b, outcome, bob_state, fidelity })
}
