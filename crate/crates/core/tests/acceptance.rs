//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! `cargo test -p revqbc --test acceptance`

use std::time::{Duration, Instant};

use revqbc::harness::oracle::{bind_oracle, conceal_oracle};
use revqbc::harness::{default_workers, run_experiment, Experiment, ExperimentConfig, ExperimentReport};
use revqbc::strategies::{deferral_detection, Alteration};

struct Outcome {
    pass: bool,
    detail: String,
}

fn config(experiment: Experiment, n: usize, trials: usize) -> ExperimentConfig {
    ExperimentConfig { omit_wall_time: true, ..ExperimentConfig::new(experiment).with_n(n).with_trials(trials) }
}

fn timed(config: &ExperimentConfig) -> (ExperimentReport, Duration) {
    let start = Instant::now();
    let report = run_experiment(config, default_workers()).expect("experiment runs");
    (report, start.elapsed())
}

fn diag(report: &ExperimentReport, key: &str) -> f64 {
    *report.diagnostics.get(key).unwrap_or_else(|| panic!("missing diagnostic {key}"))
}

fn honest(runs: &mut Vec<ExperimentConfig>) -> Outcome {
    let c = config(Experiment::Honest, 8, 10_000);
    let (report, elapsed) = timed(&c);
    runs.push(c);
    Outcome {
        pass: report.estimate == 1.0 && elapsed < Duration::from_secs(10),
        detail: format!("accepted {} in {:.2?} ({} commit aborts re-run)", report.estimate, elapsed, report.aborts),
    }
}

fn bind_single(runs: &mut Vec<ExperimentConfig>) -> Outcome {
    let c = config(Experiment::Bind, 8, 10_000).with_rounds(1);
    let (report, _) = timed(&c);
    runs.push(c);
    let oracle = bind_oracle(4).expect("oracle").accept;
    Outcome {
        pass: (report.estimate - 0.5).abs() <= 0.02 && oracle == 0.5,
        detail: format!("estimate {} (±0.02 of 0.5), exhaustive n=4 oracle {oracle}", report.estimate),
    }
}

fn bind_multi(runs: &mut Vec<ExperimentConfig>) -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for s in 1..=5usize {
        let c = config(Experiment::Bind, 8, 10_000).with_rounds(s);
        let (report, _) = timed(&c);
        runs.push(c);
        let target = 0.5f64.powi(s as i32);
        let se = (target * (1.0 - target) / report.trials as f64).sqrt();
        let z = (report.estimate - target) / se;
        pass &= z.abs() <= 3.0;
        parts.push(format!("s={s}: {} (z={z:+.2})", report.estimate));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(60);
    Outcome { pass, detail: format!("{} in {elapsed:.2?}", parts.join(", ")) }
}

fn conceal() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for k in 1..=4usize {
        let o = conceal_oracle(6, k).expect("oracle");
        let bound = 0.5f64.powi(k as i32 + 1);
        let advantage = o.posterior - 0.5;
        let excess = o.posterior - o.closed_form;
        pass &= advantage <= bound + 1e-12 && excess.abs() <= 1e-12;
        parts.push(format!(
            "k={k}: advantage {advantage} (bound {bound}, excess {excess:e}; unconditioned on r(x) {:.6})",
            o.unconditional - 0.5
        ));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn nosig(runs: &mut Vec<ExperimentConfig>) -> Outcome {
    let c = config(Experiment::Nosig, 6, 1000);
    let (report, elapsed) = timed(&c);
    runs.push(c);
    Outcome {
        pass: report.estimate < 1e-9,
        detail: format!("max trace distance {:e} over {} states in {elapsed:.2?}", report.estimate, report.trials),
    }
}

fn mlc(runs: &mut Vec<ExperimentConfig>) -> Outcome {
    let c = config(Experiment::Mlc, 3, 10_000);
    let (report, _) = timed(&c);
    runs.push(c);
    let members = 1usize << (report.n - 1);
    let analytic = 1.0 / members as f64;
    let se = (analytic * (1.0 - analytic) / report.trials as f64).sqrt();
    let mut max_z = 0.0f64;
    for b in 0..2 {
        for j in 0..members {
            let freq = diag(&report, &format!("b{b}_freq_{j}"));
            max_z = max_z.max(((freq - analytic) / se).abs());
        }
    }
    let fidelity = diag(&report, "min_fidelity");
    let flip = deferral_detection(4, Alteration::FlipOutcome).expect("enumeration").detection;
    let switch = deferral_detection(4, Alteration::SwitchBasis).expect("enumeration").detection;
    Outcome {
        pass: max_z <= 3.0 && fidelity >= 1.0 - 1e-9 && flip >= 0.5,
        detail: format!(
            "max |z| {max_z:.2}, min fidelity {fidelity}, separable detection {flip} per flipped outcome \
             (basis switch with flip: {switch})"
        ),
    }
}

fn determinism(runs: &[ExperimentConfig]) -> Outcome {
    let mut mismatches = Vec::new();
    for c in runs {
        let reports: Vec<String> =
            [1, 4, 8].iter().map(|&w| run_experiment(c, w).expect("experiment runs").to_json()).collect();
        if reports.iter().any(|r| r != &reports[0]) {
            mismatches.push(format!("{} n={} rounds={}", c.experiment, c.n, c.rounds));
        }
    }
    Outcome {
        pass: mismatches.is_empty(),
        detail: if mismatches.is_empty() {
            format!("{} experiment runs byte-identical with 1, 4 and 8 workers", runs.len())
        } else {
            format!("differs: {}", mismatches.join(", "))
        },
    }
}

fn main() {
    let mut runs = Vec::new();
    let results = [
        ("1 honest completeness", honest(&mut runs)),
        ("2 binding, one round", bind_single(&mut runs)),
        ("3 binding, s rounds", bind_multi(&mut runs)),
        ("4 concealment", conceal()),
        ("5 no-signaling", nosig(&mut runs)),
        ("6 steering attack", mlc(&mut runs)),
    ];
    let seventh = ("7 determinism", determinism(&runs));
    let mut failed = 0;
    for (name, outcome) in results.iter().chain(std::iter::once(&seventh)) {
        println!("{} {name}: {}", if outcome.pass { "PASS" } else { "FAIL" }, outcome.detail);
        failed += !outcome.pass as usize;
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
