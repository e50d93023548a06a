use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{QuantumError, Result, ALGEBRAIC_TOL, MAX_QUBITS, ZERO_BRANCH};

pub type C64 = num_complex::Complex64;

/// Polarization basis of a single photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    /// Rectilinear, written `+`.
    #[serde(rename = "+")]
    Rectilinear,
    /// Diagonal, written `x`.
    #[serde(rename = "x")]
    Diagonal,
}

impl Basis {
    pub const BOTH: [Basis; 2] = [Basis::Rectilinear, Basis::Diagonal];

    pub fn from_bit(bit: u8) -> Basis {
        if bit & 1 == 0 {
            Basis::Rectilinear
        } else {
            Basis::Diagonal
        }
    }

    pub fn as_bit(self) -> u8 {
        match self {
            Basis::Rectilinear => 0,
            Basis::Diagonal => 1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Basis::Rectilinear => '+',
            Basis::Diagonal => 'x',
        }
    }

    pub fn from_symbol(c: char) -> Option<Basis> {
        match c {
            '+' => Some(Basis::Rectilinear),
            'x' | 'X' | '×' => Some(Basis::Diagonal),
            _ => None,
        }
    }

    pub fn conjugate(self) -> Basis {
        match self {
            Basis::Rectilinear => Basis::Diagonal,
            Basis::Diagonal => Basis::Rectilinear,
        }
    }

    /// Computational-basis amplitudes of the basis vector labelled `bit`.
    pub fn vector(self, bit: u8) -> [C64; 2] {
        let h = FRAC_1_SQRT_2;
        match (self, bit & 1) {
            (Basis::Rectilinear, 0) => [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            (Basis::Rectilinear, _) => [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            (Basis::Diagonal, 0) => [C64::new(h, 0.0), C64::new(h, 0.0)],
            (Basis::Diagonal, _) => [C64::new(h, 0.0), C64::new(-h, 0.0)],
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Normalized pure state of `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Wraps amplitudes that must already be normalized within 1e-10.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let num_qubits = qubits_for(amplitudes.len())?;
        let norm_sqr = norm_sqr(&amplitudes);
        if (norm_sqr - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(QuantumError::NotNormalized(norm_sqr));
        }
        Ok(StateVector { num_qubits, amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let num_qubits = qubits_for(amplitudes.len())?;
        let norm_sqr = norm_sqr(&amplitudes);
        if norm_sqr < ZERO_BRANCH {
            return Err(QuantumError::NotNormalized(norm_sqr));
        }
        let scale = norm_sqr.sqrt().recip();
        amplitudes.iter_mut().for_each(|a| *a *= scale);
        Ok(StateVector { num_qubits, amplitudes })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&a| C64::new(a, 0.0)).collect())
    }

    /// Computational basis state `|index>`.
    pub fn basis_state(num_qubits: usize, index: usize) -> Result<Self> {
        if num_qubits > MAX_QUBITS {
            return Err(QuantumError::TooManyQubits(num_qubits));
        }
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(QuantumError::InvalidDimension(index));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self::new(amplitudes)
    }

    /// Gaussian-random (Haar-distributed) pure state.
    pub fn random<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Result<Self> {
        if num_qubits > MAX_QUBITS {
            return Err(QuantumError::TooManyQubits(num_qubits));
        }
        let amps = (0..1usize << num_qubits)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(amps)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(QuantumError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Reorders qubits: qubit `order[k]` of `self` becomes qubit `k` of the result.
    pub fn permute_qubits(&self, order: &[usize]) -> Result<StateVector> {
        let n = self.num_qubits;
        let mut seen = vec![false; n];
        if order.len() != n {
            return Err(QuantumError::InvalidPartition(format!(
                "permutation of length {} for {} qubits",
                order.len(),
                n
            )));
        }
        for &q in order {
            if q >= n || seen[q] {
                return Err(QuantumError::InvalidPartition(format!("bad permutation {order:?}")));
            }
            seen[q] = true;
        }
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        for (new_idx, slot) in out.iter_mut().enumerate() {
            let mut old_idx = 0usize;
            for (k, &q) in order.iter().enumerate() {
                let bit = (new_idx >> (n - 1 - k)) & 1;
                old_idx |= bit << (n - 1 - q);
            }
            *slot = self.amplitudes[old_idx];
        }
        Ok(StateVector { num_qubits: n, amplitudes: out })
    }
}

fn qubits_for(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(QuantumError::InvalidDimension(len));
    }
    let n = len.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(QuantumError::TooManyQubits(n));
    }
    Ok(n)
}

fn norm_sqr(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

/// One of the four BB84 photon preparations.
pub fn prepare_bb84(bit: u8, basis: Basis) -> StateVector {
    StateVector {
        num_qubits: 1,
        amplitudes: basis.vector(bit).to_vec(),
    }
}

/// `a ⊗ b`, with `a` occupying the leading (most significant) qubits.
pub fn tensor(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    let n = a.num_qubits + b.num_qubits;
    if n > MAX_QUBITS {
        return Err(QuantumError::TooManyQubits(n));
    }
    let amplitudes = a
        .amplitudes
        .iter()
        .flat_map(|x| b.amplitudes.iter().map(move |y| x * y))
        .collect();
    Ok(StateVector { num_qubits: n, amplitudes })
}

/// Projective measurement of one qubit in `basis`.
///
/// `randomness` selects outcome 0 when it falls below the Born probability of
/// outcome 0. Returns the outcome and the renormalized collapsed state.
pub fn measure_qubit(
    state: &StateVector,
    qubit: usize,
    basis: Basis,
    randomness: f64,
) -> Result<(u8, StateVector)> {
    let n = state.num_qubits;
    if qubit >= n {
        return Err(QuantumError::InvalidQubit { qubit, num_qubits: n });
    }
    if !(0.0..1.0).contains(&randomness) {
        return Err(QuantumError::InvalidRandomness(randomness));
    }
    let mask = 1usize << (n - 1 - qubit);
    let [v0, v1] = [basis.vector(0), basis.vector(1)];

    // Component of each amplitude pair along v0, summed in probability.
    let mut p0 = 0.0;
    let mut total = 0.0;
    for i in (0..state.dim()).filter(|i| i & mask == 0) {
        let (a0, a1) = (state.amplitudes[i], state.amplitudes[i | mask]);
        let c0 = v0[0].conj() * a0 + v0[1].conj() * a1;
        p0 += c0.norm_sqr();
        total += a0.norm_sqr() + a1.norm_sqr();
    }
    let p0 = p0 / total;
    let outcome = if randomness < p0 { 0u8 } else { 1u8 };
    let prob = if outcome == 0 { p0 } else { 1.0 - p0 };
    if prob < ZERO_BRANCH {
        return Err(QuantumError::ZeroProbabilityBranch);
    }
    let v = if outcome == 0 { v0 } else { v1 };
    let scale = (prob * total).sqrt().recip();
    let mut amplitudes = vec![C64::new(0.0, 0.0); state.dim()];
    for i in (0..state.dim()).filter(|i| i & mask == 0) {
        let (a0, a1) = (state.amplitudes[i], state.amplitudes[i | mask]);
        let c = v[0].conj() * a0 + v[1].conj() * a1;
        amplitudes[i] = v[0] * c * scale;
        amplitudes[i | mask] = v[1] * c * scale;
    }
    Ok((outcome, StateVector { num_qubits: n, amplitudes }))
}
