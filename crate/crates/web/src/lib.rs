//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export returns a JSON string; failures become JS exceptions. The
//! `*_json` functions behind them are plain Rust and run natively too.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use revqbc::harness::{run_experiment, Experiment, ExperimentConfig, ExperimentReport};
use revqbc::protocol::{run_round, BitString, ProtocolParams};
use revqbc::strategies::{acceptor_from_id, committer_from_id};

/// Upper bound on Monte Carlo work per call, to keep the page responsive.
pub const MAX_TRIALS: usize = 20_000;

#[derive(Serialize)]
struct CurvePoint {
    rounds: usize,
    estimate: f64,
    stderr: f64,
    target: f64,
}

#[derive(Serialize)]
struct Steering {
    n: usize,
    trials: usize,
    labels: Vec<String>,
    frequencies: [Vec<f64>; 2],
    probability: f64,
    min_fidelity: f64,
    separable_detection: f64,
}

fn check_trials(trials: usize) -> Result<(), String> {
    if trials == 0 || trials > MAX_TRIALS {
        return Err(format!("trials must be in 1..={MAX_TRIALS}, got {trials}"));
    }
    Ok(())
}

fn experiment(config: ExperimentConfig) -> Result<ExperimentReport, String> {
    let config = ExperimentConfig { omit_wall_time: true, ..config };
    run_experiment(&config, 1).map_err(|e| e.to_string())
}

/// One round between the named strategies; `r` empty means all ones.
pub fn play_round_json(alice: &str, bob: &str, n: usize, r: &str, seed: u64) -> Result<String, String> {
    let r = if r.trim().is_empty() { BitString::ones(n) } else { r.trim().parse().map_err(|e| format!("{e}"))? };
    let params = ProtocolParams::new(n, r).map_err(|e| e.to_string())?;
    let alice = committer_from_id(alice).map_err(|e| e.to_string())?;
    let bob = acceptor_from_id(bob).map_err(|e| e.to_string())?;
    let transcript = run_round(alice.as_ref(), bob.as_ref(), &params, seed).map_err(|e| e.to_string())?;
    Ok(transcript.to_json())
}

/// Flip-cheat success against `s = 1..=max_rounds` rounds.
pub fn bind_curve_json(n: usize, trials: usize, max_rounds: usize, seed: u64) -> Result<String, String> {
    check_trials(trials.saturating_mul(max_rounds))?;
    let points = (1..=max_rounds)
        .map(|s| {
            let report = experiment(
                ExperimentConfig::new(Experiment::Bind).with_n(n).with_trials(trials).with_rounds(s).with_seed(seed),
            )?;
            Ok(CurvePoint { rounds: s, estimate: report.estimate, stderr: report.stderr, target: 0.5f64.powi(s as i32) })
        })
        .collect::<Result<Vec<_>, String>>()?;
    serde_json::to_string(&points).map_err(|e| e.to_string())
}

/// Steered outcome frequencies for both openings of one held state.
pub fn steer_json(n: usize, trials: usize, seed: u64) -> Result<String, String> {
    check_trials(trials)?;
    let report = experiment(ExperimentConfig::new(Experiment::Mlc).with_n(n).with_trials(trials).with_seed(seed))?;
    let members = 1usize << (n - 1);
    let get = |key: String| report.diagnostics.get(&key).copied().ok_or(format!("missing {key}"));
    let freqs = |b: u8| (0..members).map(|j| get(format!("b{b}_freq_{j}"))).collect::<Result<Vec<_>, _>>();
    let steering = Steering {
        n,
        trials,
        labels: (0..members).map(|j| format!("{j:0w$b}", w = n - 1)).collect(),
        frequencies: [freqs(0)?, freqs(1)?],
        probability: 1.0 / members as f64,
        min_fidelity: get("min_fidelity".into())?,
        separable_detection: get("separable_detection_flip_outcome".into())?,
    };
    serde_json::to_string(&steering).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn play_round(alice: &str, bob: &str, n: usize, r: &str, seed: u64) -> Result<String, JsError> {
    play_round_json(alice, bob, n, r, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn bind_curve(n: usize, trials: usize, max_rounds: usize, seed: u64) -> Result<String, JsError> {
    bind_curve_json(n, trials, max_rounds, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn steer(n: usize, trials: usize, seed: u64) -> Result<String, JsError> {
    steer_json(n, trials, seed).map_err(|e| JsError::new(&e))
}
