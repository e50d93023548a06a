//! Ensemble steering: given a pure state on `local ⊗ remote` and any ensemble
//! realizing the remote reduced state, build a local orthonormal basis whose
//! measurement leaves the remote factor in ensemble member `j` with
//! probability `p_j`.
//!
//! With `W` the `remote x local` coefficient matrix of the global state and
//! `W = U Σ V†` its Schmidt (singular value) decomposition, write the
//! subnormalized targets as columns `t_j = √p_j |ψ_j>`. The mixing
//! coefficients `Y = Σ⁻¹ U† T` have orthonormal rows whenever `T T† = W W†`.
//! The conjugated basis vectors are `V Y + V⊥ Q†`, where `Q` spans the kernel
//! of `Y`. Any further completion of the local space lands orthogonal to the
//! Schmidt support and yields zero-probability outcomes.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{
    tensor, Basis, DensityMatrix, QuantumError, Result, Split, StateVector, ALGEBRAIC_TOL,
    SYNTHESIS_TOL, ZERO_BRANCH, C64,
};

/// Eigenvalues of the remote reduced state below this are treated as zero.
const RANK_TOL: f64 = 1e-12;

/// Finite ensemble `{p_j, |ψ_j>}` of equal-dimension pure states.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    members: Vec<(f64, StateVector)>,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, StateVector)>) -> Result<Self> {
        let Some((_, first)) = members.first() else {
            return Err(QuantumError::InvalidEnsemble("no members".into()));
        };
        let dim = first.dim();
        let mut total = 0.0;
        for (p, s) in &members {
            if s.dim() != dim {
                return Err(QuantumError::DimensionMismatch { left: dim, right: s.dim() });
            }
            if !(-ALGEBRAIC_TOL..=1.0 + ALGEBRAIC_TOL).contains(p) {
                return Err(QuantumError::InvalidEnsemble(format!("probability {p}")));
            }
            total += p;
        }
        if (total - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(QuantumError::InvalidEnsemble(format!("probabilities sum to {total}")));
        }
        Ok(Ensemble { members })
    }

    /// Uniform ensemble of all `2^k` product strings prepared in `basis`.
    pub fn uniform_product(num_qubits: usize, basis: Basis) -> Result<Self> {
        let size = 1usize << num_qubits;
        let p = 1.0 / size as f64;
        let members = (0..size)
            .map(|idx| {
                let mut state = super::prepare_bb84(bit_of(idx, 0, num_qubits), basis);
                for q in 1..num_qubits {
                    state = tensor(&state, &super::prepare_bb84(bit_of(idx, q, num_qubits), basis))?;
                }
                Ok((p, state))
            })
            .collect::<Result<Vec<_>>>()?;
        Ensemble::new(members)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].1.dim()
    }

    pub fn members(&self) -> &[(f64, StateVector)] {
        &self.members
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.members.iter().map(|(p, _)| *p).collect()
    }

    /// `Σ p_j |ψ_j><ψ_j|`.
    pub fn mixture(&self) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(self.target_matrix_gram())
    }

    /// Columns `√p_j |ψ_j>`.
    fn target_matrix(&self) -> DMatrix<C64> {
        let mut t = DMatrix::zeros(self.dim(), self.len());
        for (j, (p, s)) in self.members.iter().enumerate() {
            let w = p.max(0.0).sqrt();
            for (i, a) in s.amplitudes().iter().enumerate() {
                t[(i, j)] = a * w;
            }
        }
        t
    }

    fn target_matrix_gram(&self) -> DMatrix<C64> {
        let t = self.target_matrix();
        &t * t.adjoint()
    }
}

fn bit_of(idx: usize, q: usize, n: usize) -> u8 {
    ((idx >> (n - 1 - q)) & 1) as u8
}

/// Orthonormal basis `{|g_j>}` of a local factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringBasis {
    vectors: Vec<DVector<C64>>,
    mixing: Option<DMatrix<C64>>,
}

impl SteeringBasis {
    /// Accepts `dim` vectors of length `dim` orthonormal within 1e-9.
    pub fn from_vectors(vectors: Vec<DVector<C64>>) -> Result<Self> {
        let dim = vectors.len();
        if dim == 0 {
            return Err(QuantumError::InvalidPartition("empty basis".into()));
        }
        for v in &vectors {
            if v.len() != dim {
                return Err(QuantumError::DimensionMismatch { left: dim, right: v.len() });
            }
        }
        let basis = SteeringBasis { vectors, mixing: None };
        let dev = basis.orthonormality_error();
        if dev > SYNTHESIS_TOL {
            return Err(QuantumError::NotOrthonormal(dev));
        }
        Ok(basis)
    }

    /// Product basis `|s>_{bases}` over the strings `s`, in big-endian order.
    pub fn product(bases: &[Basis]) -> Result<Self> {
        let k = bases.len();
        if k == 0 || k > super::MAX_QUBITS {
            return Err(QuantumError::TooManyQubits(k));
        }
        let vectors = (0..1usize << k)
            .map(|idx| {
                let mut state = super::prepare_bb84(bit_of(idx, 0, k), bases[0]);
                for (q, b) in bases.iter().enumerate().skip(1) {
                    state = tensor(&state, &super::prepare_bb84(bit_of(idx, q, k), *b))?;
                }
                Ok(DVector::from_vec(state.into_amplitudes()))
            })
            .collect::<Result<Vec<_>>>()?;
        SteeringBasis::from_vectors(vectors)
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[DVector<C64>] {
        &self.vectors
    }

    pub fn vector(&self, j: usize) -> &DVector<C64> {
        &self.vectors[j]
    }

    /// Unitary `U[j][k] = <f_k|g_j>` relating the local Schmidt basis `{|f_k>}`
    /// (completed to the full local space) to the steering basis. Present only
    /// for bases produced by [`steering_basis`].
    pub fn mixing_matrix(&self) -> Option<&DMatrix<C64>> {
        self.mixing.as_ref()
    }

    /// Largest `|<g_j|g_k> - δ_jk|`.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, a) in self.vectors.iter().enumerate() {
            for (k, b) in self.vectors.iter().enumerate().skip(j) {
                let ip = a.dotc(b);
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((ip - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// Orthonormal vectors completing `existing` (assumed orthonormal) to a basis
/// of `C^dim`. Candidates are standard basis vectors, picked greedily by
/// largest residual.
pub fn complete_orthonormal(existing: &[DVector<C64>], dim: usize) -> Vec<DVector<C64>> {
    let needed = dim.saturating_sub(existing.len());
    let mut residual: DMatrix<C64> = DMatrix::identity(dim, dim);
    for v in existing {
        let proj = v.adjoint() * &residual;
        residual -= v * proj;
    }
    let mut added: Vec<DVector<C64>> = Vec::with_capacity(needed);
    for _ in 0..needed {
        let (best, _) = residual
            .column_iter()
            .enumerate()
            .map(|(i, c)| (i, c.norm_squared()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let mut q: DVector<C64> = residual.column(best).into_owned();
        for v in existing.iter().chain(added.iter()) {
            let c = v.dotc(&q);
            q -= v * c;
        }
        q /= C64::new(q.norm(), 0.0);
        let proj = q.adjoint() * &residual;
        residual -= &q * proj;
        added.push(q);
    }
    added
}

/// Modified Gram-Schmidt, two passes.
fn orthonormalize(vectors: &mut [DVector<C64>]) {
    for _ in 0..2 {
        for i in 0..vectors.len() {
            let (done, rest) = vectors.split_at_mut(i);
            let v = &mut rest[0];
            for u in done.iter() {
                let c = u.dotc(v);
                *v -= u * c;
            }
            let n = v.norm();
            *v /= C64::new(n, 0.0);
        }
    }
}

/// Builds the local measurement basis that steers the remote factor of
/// `global` into `target`.
///
/// `local` lists the local qubits; the remote factor is the complement in
/// ascending order. Basis vector `j < target.len()` corresponds to ensemble
/// member `j`; the remaining vectors have outcome probability zero.
pub fn steering_basis(
    global: &StateVector,
    local: &[usize],
    target: &Ensemble,
) -> Result<SteeringBasis> {
    let split = Split::new(global.num_qubits(), local)?;
    let (ld, rd) = (split.local_dim(), split.remote_dim());
    if target.dim() != rd {
        return Err(QuantumError::DimensionMismatch { left: rd, right: target.dim() });
    }
    let m = target.len();
    if m > ld {
        return Err(QuantumError::InvalidEnsemble(format!(
            "{m} members exceed local dimension {ld}"
        )));
    }

    let w = split.to_matrix(global.amplitudes()).transpose();
    let t = target.target_matrix();
    let reduced = DensityMatrix::from_matrix_unchecked(&w * w.adjoint());
    let deviation = super::trace_distance(&reduced, &target.mixture())?;
    if deviation > SYNTHESIS_TOL {
        return Err(QuantumError::SteeringInfeasible { deviation });
    }

    // Schmidt data from the Hermitian eigenproblem of W W†; the complex SVD
    // route loses accuracy on rank-deficient inputs.
    let eig = SymmetricEigen::new(reduced.entries().clone());
    let rank_idx: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&k| eig.eigenvalues[k] > RANK_TOL).collect();
    let r = rank_idx.len();
    let u = &eig.eigenvectors;
    let sigma: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let w_adj = w.adjoint();
    let mut v_r: Vec<DVector<C64>> = rank_idx
        .iter()
        .map(|&k| (&w_adj * u.column(k)) / C64::new(sigma[k], 0.0))
        .collect();
    orthonormalize(&mut v_r);

    let mut y = DMatrix::<C64>::zeros(r, m);
    for (row, &k) in rank_idx.iter().enumerate() {
        let coeffs = u.column(k).adjoint() * &t;
        for j in 0..m {
            y[(row, j)] = coeffs[(0, j)] / sigma[k];
        }
    }

    // Rows of Y are orthonormal; Q spans their complement in C^m.
    let y_rows: Vec<DVector<C64>> = (0..r).map(|row| y.row(row).adjoint()).collect();
    let q = complete_orthonormal(&y_rows, m);
    let v_perp = complete_orthonormal(&v_r, ld);

    let mut conj_g: Vec<DVector<C64>> = (0..m)
        .map(|j| {
            let mut col = DVector::<C64>::zeros(ld);
            for (row, vk) in v_r.iter().enumerate() {
                col += vk * y[(row, j)];
            }
            for (qi, vp) in q.iter().zip(&v_perp) {
                col += vp * qi[j].conj();
            }
            col
        })
        .collect();
    orthonormalize(&mut conj_g);
    let tail = complete_orthonormal(&conj_g, ld);
    conj_g.extend(tail);
    let vectors: Vec<DVector<C64>> = conj_g.iter().map(|c| c.conjugate()).collect();

    // Local Schmidt vectors |f_k> are the conjugated right singular vectors.
    let schmidt: Vec<DVector<C64>> = v_r.iter().chain(v_perp.iter()).map(|c| c.conjugate()).collect();
    let mixing = DMatrix::from_fn(ld, ld, |j, k| schmidt[k].dotc(&vectors[j]));

    let basis = SteeringBasis { vectors, mixing: Some(mixing) };
    let dev = basis.orthonormality_error();
    if dev > SYNTHESIS_TOL {
        return Err(QuantumError::NotOrthonormal(dev));
    }
    Ok(basis)
}

/// Remote-side conditional amplitudes `t_j = (<g_j| ⊗ I)|ψ>` as rows.
fn conditional_rows(state: &StateVector, split: &Split, basis: &SteeringBasis) -> Result<DMatrix<C64>> {
    if basis.dim() != split.local_dim() {
        return Err(QuantumError::DimensionMismatch {
            left: split.local_dim(),
            right: basis.dim(),
        });
    }
    let m = split.to_matrix(state.amplitudes());
    let mut g_adj = DMatrix::<C64>::zeros(basis.dim(), basis.dim());
    for (j, g) in basis.vectors().iter().enumerate() {
        for (a, z) in g.iter().enumerate() {
            g_adj[(j, a)] = z.conj();
        }
    }
    Ok(g_adj * m)
}

/// Born probabilities of every outcome of measuring `local` in `basis`.
pub fn branch_probabilities(state: &StateVector, local: &[usize], basis: &SteeringBasis) -> Result<Vec<f64>> {
    let split = Split::new(state.num_qubits(), local)?;
    let rows = conditional_rows(state, &split, basis)?;
    Ok(rows.row_iter().map(|r| r.norm_squared()).collect())
}

/// Measures the `local` qubits in `basis`; returns the outcome index and the
/// collapsed state `|g_j> ⊗ t_j / ||t_j||` in the original qubit order.
pub fn measure_in_basis(
    state: &StateVector,
    local: &[usize],
    basis: &SteeringBasis,
    randomness: f64,
) -> Result<(usize, StateVector)> {
    if !(0.0..1.0).contains(&randomness) {
        return Err(QuantumError::InvalidRandomness(randomness));
    }
    let split = Split::new(state.num_qubits(), local)?;
    let rows = conditional_rows(state, &split, basis)?;
    let probs: Vec<f64> = rows.row_iter().map(|r| r.norm_squared()).collect();
    let total: f64 = probs.iter().sum();
    let threshold = randomness * total;
    let mut cumulative = 0.0;
    let mut outcome = probs.len() - 1;
    for (j, p) in probs.iter().enumerate() {
        cumulative += p;
        if threshold < cumulative {
            outcome = j;
            break;
        }
    }
    if probs[outcome] < ZERO_BRANCH {
        return Err(QuantumError::ZeroProbabilityBranch);
    }
    let scale = C64::new(probs[outcome].sqrt().recip(), 0.0);
    let remote = rows.row(outcome) * scale;
    let post = basis.vector(outcome) * remote;
    Ok((outcome, StateVector::new(split.assemble(&post))?))
}
