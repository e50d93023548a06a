use nalgebra::{DMatrix, SymmetricEigen};

use super::{QuantumError, Result, Split, StateVector, ALGEBRAIC_TOL, C64};

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates hermiticity, trace and positivity to within 1e-10.
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        let rho = DensityMatrix { entries };
        rho.check()?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(entries: DMatrix<C64>) -> Self {
        DensityMatrix { entries }
    }

    /// `|psi><psi|`.
    pub fn pure(state: &StateVector) -> Self {
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        DensityMatrix { entries: &v * v.adjoint() }
    }

    /// `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            entries: DMatrix::identity(dim, dim) * C64::new(1.0 / dim as f64, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = hermitian_eigenvalues(&self.entries);
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `<psi|rho|psi>`.
    pub fn fidelity_with_pure(&self, state: &StateVector) -> Result<f64> {
        if state.dim() != self.dim() {
            return Err(QuantumError::DimensionMismatch {
                left: self.dim(),
                right: state.dim(),
            });
        }
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        Ok((v.adjoint() * &self.entries * &v)[(0, 0)].re)
    }

    pub fn check(&self) -> Result<()> {
        let m = &self.entries;
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(QuantumError::InvalidDensity(format!(
                "shape {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let herm = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > ALGEBRAIC_TOL {
            return Err(QuantumError::InvalidDensity(format!("not Hermitian ({herm:e})")));
        }
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > ALGEBRAIC_TOL {
            return Err(QuantumError::InvalidDensity(format!("trace {tr}")));
        }
        let min = hermitian_eigenvalues(m).into_iter().fold(f64::INFINITY, f64::min);
        if min < -ALGEBRAIC_TOL {
            return Err(QuantumError::InvalidDensity(format!("eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// Reduced state on `keep` for a density matrix over `num_qubits` qubits.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let dim = self.dim();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(QuantumError::InvalidPartition(format!("dimension {dim} is not a qubit register")));
        }
        let split = Split::new(dim.trailing_zeros() as usize, keep)?;
        let (kd, td) = (split.local_dim(), split.remote_dim());
        let out = DMatrix::from_fn(kd, kd, |a, b| {
            (0..td)
                .map(|t| self.entries[(split.full_index(a, t), split.full_index(b, t))])
                .sum()
        });
        Ok(DensityMatrix { entries: out })
    }
}

fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    // Symmetrize so rounding noise cannot leak imaginary parts into the solver.
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    SymmetricEigen::new(h).eigenvalues.iter().copied().collect()
}

/// Reduced state of a pure state on the ordered qubit list `keep`.
pub fn partial_trace(state: &StateVector, keep: &[usize]) -> Result<DensityMatrix> {
    let split = Split::new(state.num_qubits(), keep)?;
    let m = split.to_matrix(state.amplitudes());
    Ok(DensityMatrix { entries: &m * m.adjoint() })
}

/// Reduced state of a density matrix on the ordered qubit list `keep`.
pub fn partial_trace_density(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    rho.partial_trace(keep)
}

/// `(1/2) * sum |eig(rho - sigma)|`, clamped to `[0, 1]`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(QuantumError::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let diff = &rho.entries - &sigma.entries;
    let d: f64 = hermitian_eigenvalues(&diff).iter().map(|e| e.abs()).sum::<f64>() * 0.5;
    Ok(d.clamp(0.0, 1.0))
}
