use nalgebra::DMatrix;

use super::{QuantumError, Result, C64};

/// A bipartition of an `n`-qubit register into an ordered local list and the
/// remaining (remote) qubits in ascending order.
///
/// The local index is big-endian over `local` in the order given; the remote
/// index is big-endian over the complement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    num_qubits: usize,
    local: Vec<usize>,
    remote: Vec<usize>,
    local_offsets: Vec<usize>,
    remote_offsets: Vec<usize>,
}

impl Split {
    pub fn new(num_qubits: usize, local: &[usize]) -> Result<Self> {
        let mut seen = vec![false; num_qubits];
        for &q in local {
            if q >= num_qubits {
                return Err(QuantumError::InvalidQubit { qubit: q, num_qubits });
            }
            if seen[q] {
                return Err(QuantumError::InvalidPartition(format!("qubit {q} listed twice")));
            }
            seen[q] = true;
        }
        let remote: Vec<usize> = (0..num_qubits).filter(|&q| !seen[q]).collect();
        let local_offsets = offsets(num_qubits, local);
        let remote_offsets = offsets(num_qubits, &remote);
        Ok(Split {
            num_qubits,
            local: local.to_vec(),
            remote,
            local_offsets,
            remote_offsets,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn local(&self) -> &[usize] {
        &self.local
    }

    pub fn remote(&self) -> &[usize] {
        &self.remote
    }

    pub fn local_dim(&self) -> usize {
        self.local_offsets.len()
    }

    pub fn remote_dim(&self) -> usize {
        self.remote_offsets.len()
    }

    #[inline]
    pub fn full_index(&self, local: usize, remote: usize) -> usize {
        self.local_offsets[local] | self.remote_offsets[remote]
    }

    /// Reshape amplitudes into a `local_dim x remote_dim` matrix.
    pub fn to_matrix(&self, amplitudes: &[C64]) -> DMatrix<C64> {
        debug_assert_eq!(amplitudes.len(), 1 << self.num_qubits);
        DMatrix::from_fn(self.local_dim(), self.remote_dim(), |l, r| {
            amplitudes[self.full_index(l, r)]
        })
    }

    /// Inverse of [`Split::to_matrix`].
    pub fn assemble(&self, matrix: &DMatrix<C64>) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); 1 << self.num_qubits];
        for l in 0..self.local_dim() {
            for r in 0..self.remote_dim() {
                out[self.full_index(l, r)] = matrix[(l, r)];
            }
        }
        out
    }
}

fn offsets(num_qubits: usize, qubits: &[usize]) -> Vec<usize> {
    let k = qubits.len();
    (0..1usize << k)
        .map(|idx| {
            qubits.iter().enumerate().fold(0usize, |acc, (pos, &q)| {
                let bit = (idx >> (k - 1 - pos)) & 1;
                acc | (bit << (num_qubits - 1 - q))
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_are_big_endian() {
        let s = Split::new(3, &[2, 0]).unwrap();
        assert_eq!(s.remote(), &[1]);
        // local index 0b10 -> qubit 2 set -> full bit 0
        assert_eq!(s.full_index(0b10, 0), 0b001);
        assert_eq!(s.full_index(0b01, 0), 0b100);
        assert_eq!(s.full_index(0, 1), 0b010);
    }

    #[test]
    fn rejects_bad_partitions() {
        assert!(Split::new(2, &[2]).is_err());
        assert!(Split::new(2, &[1, 1]).is_err());
    }

    #[test]
    fn assemble_inverts_to_matrix() {
        let amps: Vec<C64> = (0..16).map(|i| C64::new(i as f64, -(i as f64))).collect();
        let s = Split::new(4, &[3, 1]).unwrap();
        assert_eq!(s.assemble(&s.to_matrix(&amps)), amps);
    }
}
