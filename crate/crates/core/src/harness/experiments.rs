use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::oracle::{bind_oracle, conceal_oracle, honest_oracle, ORACLE_MAX_N};
use super::{derive_seed, Experiment, ExperimentConfig, ExperimentReport, HarnessError};
use crate::protocol::{run_round, BitString, ProtocolError, ProtocolParams, Transcript};
use crate::quantum::{
    measure_in_basis, partial_trace, trace_distance, Basis, DensityMatrix, StateVector, SteeringBasis, C64,
    SYNTHESIS_TOL, ZERO_BRANCH,
};
use crate::strategies::{
    default_ensembles, deferral_detection, epr_bob_prepare, mlc_build_plan, mlc_open, Alteration, FlipAlice,
    GuessBob, HonestAlice, HonestBob, MlcPlan,
};

/// Fresh attempts per round before a commit-phase abort becomes an error.
pub const MAX_ATTEMPTS: u64 = 256;

const R_STREAM: u64 = 0x5EED_0001;

/// What one trial contributes to the aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub seed: u64,
    pub success: bool,
    /// Experiment-specific real (minimum fidelity for `mlc`, distance for `nosig`).
    pub value: f64,
    /// Commit-phase aborts that were re-run.
    pub aborts: u64,
    /// Rounds discarded because they fell outside the conditioning event.
    pub rejected: u64,
    /// Experiment-specific indices (steered outcomes for `mlc`).
    pub detail: Vec<usize>,
}

impl TrialOutcome {
    fn new(seed: u64) -> Self {
        TrialOutcome { seed, success: false, value: 0.0, aborts: 0, rejected: 0, detail: Vec::new() }
    }
}

/// Per-trial seed.
pub fn trial_seed(master: u64, index: usize) -> u64 {
    derive_seed(master, index as u64)
}

/// Runs `config`; trials execute on `workers` threads and merge by index.
pub fn run_experiment(config: &ExperimentConfig, workers: usize) -> Result<ExperimentReport, HarnessError> {
    config.validate()?;
    let start = (!config.omit_wall_time).then(Instant::now);
    let seeds: Vec<u64> = (0..config.trials).map(|i| trial_seed(config.master_seed, i)).collect();
    let context = Context::new(config)?;
    let outcomes = run_trials(&context, &seeds, workers)?;
    let mut report = context.aggregate(&outcomes)?;
    report.wall_time = start.map_or(0.0, |t| t.elapsed().as_secs_f64());
    report.finalize();
    Ok(report)
}

/// Runs the trials of `config` for explicit seeds, in order.
pub fn run_trials_with_seeds(
    config: &ExperimentConfig,
    seeds: &[u64],
    workers: usize,
) -> Result<Vec<TrialOutcome>, HarnessError> {
    config.validate()?;
    run_trials(&Context::new(config)?, seeds, workers)
}

fn run_trials(context: &Context, seeds: &[u64], workers: usize) -> Result<Vec<TrialOutcome>, HarnessError> {
    let results = parallel_map(seeds, workers, |&seed| context.trial(seed))?;
    let mut outcomes = Vec::with_capacity(results.len());
    for (index, result) in results.into_iter().enumerate() {
        match result {
            Ok(outcome) => outcomes.push(outcome),
            Err(TrialError::Invariant(message)) => {
                return Err(HarnessError::Invariant { trial: index, seed: seeds[index], message })
            }
            Err(TrialError::Protocol(source)) => {
                return Err(HarnessError::Trial { trial: index, seed: seeds[index], source })
            }
        }
    }
    Ok(outcomes)
}

#[cfg(feature = "parallel")]
fn parallel_map<T: Sync, U: Send>(
    items: &[T],
    workers: usize,
    f: impl Fn(&T) -> U + Sync + Send,
) -> Result<Vec<U>, HarnessError> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(f).collect()))
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T: Sync, U: Send>(
    items: &[T],
    _workers: usize,
    f: impl Fn(&T) -> U + Sync + Send,
) -> Result<Vec<U>, HarnessError> {
    Ok(items.iter().map(f).collect())
}

enum TrialError {
    Invariant(String),
    Protocol(ProtocolError),
}

impl From<ProtocolError> for TrialError {
    fn from(e: ProtocolError) -> Self {
        TrialError::Protocol(e)
    }
}

impl From<crate::quantum::QuantumError> for TrialError {
    fn from(e: crate::quantum::QuantumError) -> Self {
        TrialError::Protocol(e.into())
    }
}

/// Shared, read-only state for every trial of one experiment.
struct Context {
    config: ExperimentConfig,
    plan: Option<MlcPlan>,
}

impl Context {
    fn new(config: &ExperimentConfig) -> Result<Self, HarnessError> {
        let plan = if config.experiment == Experiment::Mlc {
            let [e0, e1] = default_ensembles(config.n)?;
            Some(mlc_build_plan(config.n, e0, e1)?)
        } else {
            None
        };
        Ok(Context { config: config.clone(), plan })
    }

    fn trial(&self, seed: u64) -> Result<TrialOutcome, TrialError> {
        match self.config.experiment {
            Experiment::Honest => self.honest_trial(seed),
            Experiment::Bind => self.bind_trial(seed),
            Experiment::Conceal => self.conceal_trial(seed),
            Experiment::Mlc => self.mlc_trial(seed),
            Experiment::Nosig => self.nosig_trial(seed),
        }
    }

    /// One protocol round with `r` drawn by `draw_r`, re-run with fresh
    /// randomness while the commitment aborts.
    fn round(
        &self,
        alice: &dyn crate::protocol::Committer,
        bob: &dyn crate::protocol::Acceptor,
        seed: u64,
        stream: u64,
        outcome: &mut TrialOutcome,
        draw_r: impl Fn(&mut ChaCha8Rng) -> Result<BitString, ProtocolError>,
    ) -> Result<Transcript, TrialError> {
        for attempt in 0..MAX_ATTEMPTS {
            let round_seed = derive_seed(seed, (stream << 16) | attempt);
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(round_seed, R_STREAM));
            let mut params = ProtocolParams::new(self.config.n, draw_r(&mut rng)?)?;
            params.rounds = self.config.rounds;
            params.master_seed = self.config.master_seed;
            let transcript = run_round(alice, bob, &params, round_seed)?;
            if transcript.verdict.is_commit_abort() {
                outcome.aborts += 1;
                continue;
            }
            return Ok(transcript);
        }
        Err(TrialError::Invariant(format!("commitment aborted {MAX_ATTEMPTS} times in a row")))
    }

    fn honest_trial(&self, seed: u64) -> Result<TrialOutcome, TrialError> {
        let mut outcome = TrialOutcome::new(seed);
        let n = self.config.n;
        let t = self.round(&HonestAlice::default(), &HonestBob, seed, 0, &mut outcome, |rng| {
            Ok(BitString::random(n, rng))
        })?;
        if !t.verdict.is_accept() {
            return Err(TrialError::Invariant(format!("honest round not accepted: {:?}", t.verdict)));
        }
        outcome.success = true;
        Ok(outcome)
    }

    fn bind_trial(&self, seed: u64) -> Result<TrialOutcome, TrialError> {
        let mut outcome = TrialOutcome::new(seed);
        let n = self.config.n;
        outcome.success = true;
        for round in 0..self.config.rounds as u64 {
            let t = self.round(&FlipAlice::default(), &HonestBob, seed, round, &mut outcome, |rng| {
                Ok(BitString::random(n, rng))
            })?;
            if !t.verdict.is_accept() {
                outcome.success = false;
                break;
            }
        }
        Ok(outcome)
    }

    fn conceal_trial(&self, seed: u64) -> Result<TrialOutcome, TrialError> {
        let mut outcome = TrialOutcome::new(seed);
        let (n, k) = (self.config.n, self.config.r_weight);
        let bob = GuessBob::default();
        for attempt in 0..MAX_ATTEMPTS {
            let t = self.round(&HonestAlice::default(), &bob, seed, attempt, &mut outcome, |rng| {
                BitString::random_with_weight(n, k, rng)
            })?;
            let x = t.evidence.map(|e| e.x).unwrap_or(0);
            if t.params.r.get(x) == 1 {
                outcome.rejected += 1;
                continue;
            }
            if !t.verdict.is_accept() {
                return Err(TrialError::Invariant(format!("honest round not accepted: {:?}", t.verdict)));
            }
            let b = t.alice_record.as_ref().map(|rec| rec.b);
            outcome.success = t.bob_guess.is_some() && t.bob_guess == b;
            return Ok(outcome);
        }
        Err(TrialError::Invariant(format!("excluded position hit r = 1 in {MAX_ATTEMPTS} rounds")))
    }

    fn mlc_trial(&self, seed: u64) -> Result<TrialOutcome, TrialError> {
        let plan = self.plan.as_ref().expect("mlc plan is built with the context");
        let mut outcome = TrialOutcome::new(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prep = epr_bob_prepare(plan.n, &mut rng)?;
        let held = plan.held_state(&prep)?;
        let mut min_fidelity = f64::INFINITY;
        for b in 0..2u8 {
            let opening = mlc_open(plan, &held, b, &mut rng)?;
            min_fidelity = min_fidelity.min(opening.fidelity);
            outcome.detail.push(opening.outcome);
        }
        outcome.value = min_fidelity;
        outcome.success = min_fidelity >= 1.0 - SYNTHESIS_TOL;
        Ok(outcome)
    }

    fn nosig_trial(&self, seed: u64) -> Result<TrialOutcome, TrialError> {
        let mut outcome = TrialOutcome::new(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let local_qubits = rng.random_range(1..=self.config.n);
        let remote_qubits = rng.random_range(1..=self.config.n);
        let total = local_qubits + remote_qubits;
        let state = StateVector::random(total, &mut rng)?;
        let local: Vec<usize> = (0..local_qubits).collect();
        let remote: Vec<usize> = (local_qubits..total).collect();
        let before = partial_trace(&state, &remote)?;

        let theta: Vec<Basis> = (0..local_qubits).map(|_| Basis::from_bit(rng.random_range(0..2))).collect();
        let product = SteeringBasis::product(&theta)?;
        let random = random_basis(1 << local_qubits, &mut rng)?;
        let after_product = averaged_remote_state(&state, &local, &remote, &product)?;
        let after_random = averaged_remote_state(&state, &local, &remote, &random)?;
        outcome.value = [
            trace_distance(&before, &after_product)?,
            trace_distance(&before, &after_random)?,
            trace_distance(&after_product, &after_random)?,
        ]
        .into_iter()
        .fold(0.0, f64::max);
        outcome.success = outcome.value < SYNTHESIS_TOL;
        Ok(outcome)
    }

    fn aggregate(&self, outcomes: &[TrialOutcome]) -> Result<ExperimentReport, HarnessError> {
        let config = &self.config;
        let mut report = ExperimentReport::for_config(config);
        let trials = outcomes.len() as f64;
        let successes = outcomes.iter().filter(|o| o.success).count() as f64;
        let p = successes / trials;
        report.estimate = p;
        report.stderr = (p * (1.0 - p) / trials).sqrt();
        report.aborts = outcomes.iter().map(|o| o.aborts).sum();
        let small = config.n <= ORACLE_MAX_N;
        match config.experiment {
            Experiment::Honest => {
                if small {
                    let o = honest_oracle(config.n)?;
                    report.exact = Some(o.accept);
                    report.diagnostic("exact_commit_abort_probability", o.commit_abort);
                }
            }
            Experiment::Bind => {
                report.diagnostic("target_two_pow_minus_s", 0.5f64.powi(config.rounds as i32));
                if small {
                    let o = bind_oracle(config.n)?;
                    report.exact = Some(o.accept.powi(config.rounds as i32));
                    report.diagnostic("exact_single_round_accept", o.accept);
                    report.diagnostic("exact_failed_cheat_fraction", o.failed);
                    report.diagnostic("exact_matched_basis_detection", o.matched_detection);
                    report.diagnostic("exact_mismatched_basis_detection", o.mismatched_detection);
                }
            }
            Experiment::Conceal => {
                let k = config.r_weight;
                let closed_form = (1.0 + 0.5f64.powi(k as i32)) / 2.0;
                report.diagnostic("closed_form", closed_form);
                report.diagnostic("rejected_rounds", outcomes.iter().map(|o| o.rejected).sum::<u64>() as f64);
                if small {
                    let o = conceal_oracle(config.n, k)?;
                    report.exact = Some(o.posterior);
                    report.diagnostic("exact_parity_proxy", o.parity_proxy);
                    report.diagnostic("exact_unconditional_posterior", o.unconditional);
                    if k > 0 {
                        report.diagnostic("exact_posterior_given_r_x_1", o.excluded_one);
                    }
                    let excess = o.posterior - closed_form;
                    report.diagnostic("exact_excess_over_closed_form", excess);
                    if excess > 1e-12 {
                        report.flags.push(format!("leakage: posterior exceeds (1 + 2^-k)/2 by {excess:e}"));
                    }
                }
            }
            Experiment::Mlc => self.mlc_diagnostics(outcomes, &mut report)?,
            Experiment::Nosig => {
                let max = outcomes.iter().map(|o| o.value).fold(0.0, f64::max);
                let mean = outcomes.iter().map(|o| o.value).sum::<f64>() / trials;
                report.estimate = max;
                report.stderr = 0.0;
                report.diagnostic("mean_trace_distance", mean);
                report.diagnostic("fraction_below_1e-9", p);
                if max >= SYNTHESIS_TOL {
                    report.flags.push(format!("signaling: maximum trace distance {max:e} >= 1e-9"));
                }
            }
        }
        Ok(report)
    }

    fn mlc_diagnostics(&self, outcomes: &[TrialOutcome], report: &mut ExperimentReport) -> Result<(), HarnessError> {
        let plan = self.plan.as_ref().expect("mlc plan is built with the context");
        let trials = outcomes.len() as f64;
        report.exact = Some(1.0);
        report.diagnostic("local_dim", plan.local_dim() as f64);
        report.diagnostic("ancilla_dim", plan.ancilla_dim() as f64);
        report.diagnostic("min_fidelity", outcomes.iter().map(|o| o.value).fold(f64::INFINITY, f64::min));
        let mut worst_z = 0.0f64;
        for b in 0..2 {
            let probs = plan.ensembles[b].probabilities();
            let mut counts = vec![0usize; probs.len()];
            for o in outcomes {
                if let Some(&j) = o.detail.get(b) {
                    if j < counts.len() {
                        counts[j] += 1;
                    }
                }
            }
            let mut z_b = 0.0f64;
            for (j, (&c, &pj)) in counts.iter().zip(&probs).enumerate() {
                let sigma = (trials * pj * (1.0 - pj)).sqrt();
                let z = if sigma > 0.0 { (c as f64 - trials * pj) / sigma } else { 0.0 };
                z_b = z_b.max(z.abs());
                report.diagnostic(&format!("b{b}_freq_{j}"), c as f64 / trials);
                report.diagnostic(&format!("b{b}_prob_{j}"), pj);
            }
            report.diagnostic(&format!("b{b}_max_abs_z"), z_b);
            worst_z = worst_z.max(z_b);
        }
        if worst_z > 3.0 {
            report.flags.push(format!("steered outcome frequency deviates by {worst_z:.3} sigma"));
        }
        let mixtures = [plan.ensembles[0].mixture(), plan.ensembles[1].mixture()];
        report.diagnostic("ensemble_mixture_distance", trace_distance(&mixtures[0], &mixtures[1])?);
        let flip = deferral_detection(4, Alteration::FlipOutcome)?;
        let switch = deferral_detection(4, Alteration::SwitchBasis)?;
        report.diagnostic("separable_detection_flip_outcome", flip.detection);
        report.diagnostic("separable_detection_switch_basis", switch.detection);
        if switch.detection < 0.5 {
            report.flags.push(format!(
                "separable defense: announcing the conjugate basis with a flipped outcome is caught with probability {}",
                super::format_real(switch.detection)
            ));
        }
        Ok(())
    }
}

/// A Haar-random orthonormal basis from the QR decomposition of a complex
/// Gaussian matrix.
fn random_basis<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<SteeringBasis, TrialError> {
    let mut gauss = || rng.sample::<f64, _>(StandardNormal);
    let m = DMatrix::from_fn(dim, dim, |_, _| C64::new(gauss(), gauss()));
    let q = m.qr().q();
    Ok(SteeringBasis::from_vectors(q.column_iter().map(|c| c.into_owned()).collect())?)
}

/// `Σ_j p_j ρ_remote^{(j)}` after measuring `local` in `basis`, branch by
/// branch through the measurement routine.
fn averaged_remote_state(
    state: &StateVector,
    local: &[usize],
    remote: &[usize],
    basis: &SteeringBasis,
) -> Result<DensityMatrix, TrialError> {
    let probs = crate::quantum::branch_probabilities(state, local, basis)?;
    let dim = 1usize << remote.len();
    let mut acc = DMatrix::<C64>::zeros(dim, dim);
    let mut cumulative = 0.0;
    for (j, &pj) in probs.iter().enumerate() {
        let u = cumulative + pj / 2.0;
        cumulative += pj;
        if pj < ZERO_BRANCH {
            continue;
        }
        let (outcome, post) = measure_in_basis(state, local, basis, u.min(1.0 - f64::EPSILON))?;
        if outcome != j {
            return Err(TrialError::Invariant(format!("branch {j} sampled as {outcome}")));
        }
        acc += partial_trace(&post, remote)?.entries() * C64::new(pj, 0.0);
    }
    Ok(DensityMatrix::from_matrix_unchecked(acc))
}
