use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use revqbc::quantum::{
    branch_probabilities, measure_in_basis, measure_qubit, partial_trace, tensor, trace_distance, Basis,
    DensityMatrix, Ensemble, StateVector, SteeringBasis, C64,
};

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn random_density(dim: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let a = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let m = &a * a.adjoint();
    let tr = m.trace();
    DensityMatrix::new(m / tr).unwrap()
}

fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |_, _| gaussian(rng)).qr().q()
}

/// A state on `l + r` qubits whose Schmidt rank is at most `rank`.
fn random_state_with_rank(l: usize, r: usize, rank: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let (dl, dr) = (1usize << l, 1usize << r);
    let a = DMatrix::from_fn(dl, rank, |_, _| gaussian(rng));
    let b = DMatrix::from_fn(rank, dr, |_, _| gaussian(rng));
    let m = a * b;
    let amps: Vec<C64> = (0..dl * dr).map(|i| m[(i / dr, i % dr)]).collect();
    StateVector::normalized(amps).unwrap()
}

/// Every `m`-member ensemble for `rho` is `√p_j ψ_j = Σ_k √λ_k U[j,k] e_k`
/// for an `m x rank` isometry `U`.
fn random_ensemble(rho: &DensityMatrix, m: usize, rng: &mut ChaCha8Rng) -> Ensemble {
    let eig = rho.entries().clone().symmetric_eigen();
    let support: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&k| eig.eigenvalues[k] > 1e-12).collect();
    assert!(support.len() <= m);
    let u = random_unitary(m, rng);
    let members = (0..m)
        .map(|j| {
            let mut v = DVector::<C64>::zeros(rho.dim());
            for (col, &k) in support.iter().enumerate() {
                v += eig.eigenvectors.column(k) * (u[(j, col)] * eig.eigenvalues[k].sqrt());
            }
            let p = v.norm_squared();
            (p, StateVector::normalized(v.iter().copied().collect()).unwrap())
        })
        .collect::<Vec<_>>();
    let total: f64 = members.iter().map(|(p, _)| p).sum();
    Ensemble::new(members.into_iter().map(|(p, s)| (p / total, s)).collect()).unwrap()
}

fn hermiticity_error(m: &DMatrix<C64>) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn reduced_states_are_density_matrices(seed in any::<u64>(), n in 1usize..=6, keep_mask in any::<u8>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = StateVector::random(n, &mut rng).unwrap();
        let keep: Vec<usize> = (0..n).filter(|q| keep_mask >> q & 1 == 1).collect();
        prop_assume!(!keep.is_empty());
        let rho = partial_trace(&state, &keep).unwrap();
        prop_assert!(hermiticity_error(rho.entries()) < 1e-10);
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-10);
        prop_assert!(rho.trace().im.abs() < 1e-10);
        prop_assert!(rho.eigenvalues().iter().all(|&e| e >= -1e-10));
    }

    #[test]
    fn trace_distance_is_a_metric(seed in any::<u64>(), qubits in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = 1 << qubits;
        let (a, b, c) = (random_density(dim, &mut rng), random_density(dim, &mut rng), random_density(dim, &mut rng));
        let ab = trace_distance(&a, &b).unwrap();
        let ba = trace_distance(&b, &a).unwrap();
        let bc = trace_distance(&b, &c).unwrap();
        let ac = trace_distance(&a, &c).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!(ac <= ab + bc + 1e-9);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!(trace_distance(&a, &a).unwrap() < 1e-10);
        prop_assert!(ab > 1e-10);
    }

    #[test]
    fn measurement_keeps_states_normalized(seed in any::<u64>(), n in 1usize..=6, u in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = StateVector::random(n, &mut rng).unwrap();
        let qubit = rng.random_range(0..n);
        let basis = Basis::from_bit(rng.random_range(0..2));
        let (_, post) = measure_qubit(&state, qubit, basis, u).unwrap();
        prop_assert!((post.norm_sqr() - 1.0).abs() < 1e-10);
        let other = StateVector::random(1, &mut rng).unwrap();
        prop_assert!((tensor(&post, &other).unwrap().norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn same_basis_measurement_recovers_preparation(bit in 0u8..2, basis_bit in 0u8..2, u in 0.0f64..1.0) {
        let basis = Basis::from_bit(basis_bit);
        let state = revqbc::quantum::prepare_bb84(bit, basis);
        let (outcome, _) = measure_qubit(&state, 0, basis, u).unwrap();
        prop_assert_eq!(outcome, bit);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    /// Averaging over the outcomes of any local measurement leaves the remote
    /// reduced state unchanged.
    #[test]
    fn local_measurement_does_not_signal(seed in any::<u64>(), l in 1usize..=3, r in 1usize..=3, product in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = StateVector::random(l + r, &mut rng).unwrap();
        let local: Vec<usize> = (0..l).collect();
        let remote: Vec<usize> = (l..l + r).collect();
        let basis = if product {
            let bases: Vec<Basis> = (0..l).map(|_| Basis::from_bit(rng.random_range(0..2))).collect();
            SteeringBasis::product(&bases).unwrap()
        } else {
            let q = random_unitary(1 << l, &mut rng);
            SteeringBasis::from_vectors(q.column_iter().map(|c| c.into_owned()).collect()).unwrap()
        };
        let probs = branch_probabilities(&state, &local, &basis).unwrap();
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let before = partial_trace(&state, &remote).unwrap();
        let dim = 1 << r;
        let mut avg = DMatrix::<C64>::zeros(dim, dim);
        let mut cumulative = 0.0;
        for &p in &probs {
            let u = cumulative + p / 2.0;
            cumulative += p;
            if p < 1e-12 {
                continue;
            }
            let (_, post) = measure_in_basis(&state, &local, &basis, u.min(1.0 - 1e-15)).unwrap();
            prop_assert!((post.norm_sqr() - 1.0).abs() < 1e-10);
            avg += partial_trace(&post, &remote).unwrap().entries() * C64::new(p, 0.0);
        }
        let after = DensityMatrix::new(avg).unwrap();
        prop_assert!(trace_distance(&before, &after).unwrap() < 1e-9);
    }

    /// Steering soundness for random Schmidt ranks and random isometry
    /// ensembles of up to 8 members.
    #[test]
    fn steering_reproduces_random_ensembles(seed in any::<u64>(), l in 1usize..=3, r in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (dl, dr) = (1usize << l, 1usize << r);
        let rank = rng.random_range(1..=dl.min(dr));
        let state = random_state_with_rank(l, r, rank, &mut rng);
        let local: Vec<usize> = (0..l).collect();
        let remote: Vec<usize> = (l..l + r).collect();
        let rho = partial_trace(&state, &remote).unwrap();
        let support = rho.eigenvalues().iter().filter(|&&e| e > 1e-12).count();
        let m = rng.random_range(support..=dl.min(8));
        let target = random_ensemble(&rho, m, &mut rng);
        let basis = revqbc::quantum::steering_basis(&state, &local, &target).unwrap();
        prop_assert!(basis.orthonormality_error() < 1e-9);

        let probs = branch_probabilities(&state, &local, &basis).unwrap();
        for (j, &p) in probs.iter().enumerate() {
            let expected = target.members().get(j).map_or(0.0, |(pj, _)| *pj);
            prop_assert!((p - expected).abs() < 1e-9, "outcome {}: {} vs {}", j, p, expected);
        }
        let mut cumulative = 0.0;
        for (j, &p) in probs.iter().enumerate() {
            let u = cumulative + p / 2.0;
            cumulative += p;
            if p < 1e-9 {
                continue;
            }
            let (outcome, post) = measure_in_basis(&state, &local, &basis, u.min(1.0 - 1e-15)).unwrap();
            prop_assert_eq!(outcome, j);
            let bob = partial_trace(&post, &remote).unwrap();
            let fidelity = bob.fidelity_with_pure(&target.members()[j].1).unwrap();
            prop_assert!(fidelity >= 1.0 - 1e-9, "member {}: fidelity {}", j, fidelity);
        }
    }
}
