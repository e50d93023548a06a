use std::process::Command;

use revqbc::harness::{
    run_experiment, run_trials_with_seeds, trial_seed, write_report, ConfigFile, Experiment, ExperimentConfig,
    ExperimentReport, HarnessError, OutputFormat, CSV_HEADER,
};

fn small(experiment: Experiment) -> ExperimentConfig {
    let config = ExperimentConfig::new(experiment).with_trials(200).with_seed(99);
    let config = match experiment {
        Experiment::Mlc => config.with_n(3),
        Experiment::Nosig => config.with_n(3).with_trials(20),
        Experiment::Conceal => config.with_n(6).with_r_weight(2),
        Experiment::Bind => config.with_rounds(2),
        Experiment::Honest => config,
    };
    ExperimentConfig { omit_wall_time: true, ..config }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_revqbc"))
}

#[test]
fn csv_header_is_fixed() {
    assert_eq!(CSV_HEADER, "experiment,n,trials,seed,estimate,stderr,exact,aborts,wall_time");
    let report = run_experiment(&small(Experiment::Honest), 1).unwrap();
    let csv = report.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 9);
    assert_eq!(row[0], "honest");
    assert_eq!(row[4], "1");
    assert_eq!(row[8], "0");
}

#[test]
fn json_reports_round_trip() {
    for experiment in Experiment::ALL {
        let report = run_experiment(&small(experiment), 2).unwrap();
        let back = ExperimentReport::from_json(&report.to_json()).unwrap();
        assert_eq!(back.to_json(), report.to_json(), "{experiment}");
        assert_eq!(back.to_csv(), report.to_csv(), "{experiment}");
    }
}

#[test]
fn reports_are_byte_identical_across_workers() {
    for experiment in Experiment::ALL {
        let config = small(experiment);
        let reference = run_experiment(&config, 1).unwrap().to_json();
        for workers in [2, 4, 8] {
            assert_eq!(run_experiment(&config, workers).unwrap().to_json(), reference, "{experiment} x{workers}");
        }
    }
}

#[test]
fn written_files_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = small(Experiment::Bind);
    for format in [OutputFormat::Csv, OutputFormat::Json] {
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        write_report(&run_experiment(&config, 1).unwrap(), &a, format).unwrap();
        write_report(&run_experiment(&config, 3).unwrap(), &b, format).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }
}

/// A trial depends only on its own seed, not on its neighbours.
#[test]
fn trials_depend_only_on_their_seed() {
    let config = small(Experiment::Conceal);
    let seeds: Vec<u64> = (0..40).map(|i| trial_seed(5, i)).collect();
    let full = run_trials_with_seeds(&config, &seeds, 2).unwrap();
    let spliced: Vec<u64> = seeds.iter().copied().step_by(3).collect();
    let part = run_trials_with_seeds(&config, &spliced, 1).unwrap();
    for (k, outcome) in part.iter().enumerate() {
        assert_eq!(outcome, &full[3 * k]);
    }
}

#[test]
fn different_seeds_give_different_estimates() {
    let a = run_experiment(&small(Experiment::Conceal), 1).unwrap();
    let b = run_experiment(&small(Experiment::Conceal).with_seed(100), 1).unwrap();
    assert_ne!(a.to_json(), b.to_json());
}

#[test]
fn invalid_configurations_are_rejected() {
    let bad = [
        ExperimentConfig::new(Experiment::Honest).with_n(13),
        ExperimentConfig::new(Experiment::Mlc).with_n(6),
        ExperimentConfig::new(Experiment::Conceal).with_n(4).with_r_weight(4),
        ExperimentConfig::new(Experiment::Bind).with_rounds(0),
        ExperimentConfig::new(Experiment::Honest).with_trials(0),
    ];
    for config in bad {
        let err = run_experiment(&config, 1).unwrap_err();
        assert!(matches!(err, HarnessError::Config(_)), "{err}");
        assert_eq!(err.exit_code(), 2);
    }
    let invariant = HarnessError::Invariant { trial: 3, seed: 7, message: "x".into() };
    assert_eq!(invariant.exit_code(), 1);
    assert!(invariant.to_string().contains("seed 7"));
}

#[test]
fn config_file_values_yield_to_flags() {
    let file: ConfigFile = serde_json::from_str(r#"{"n": 5, "trials": 40, "seed": 1, "rounds": 2}"#).unwrap();
    let config = file.merge(ConfigFile { trials: Some(30), ..Default::default() }).resolve(Experiment::Bind).unwrap();
    assert_eq!((config.n, config.trials, config.master_seed, config.rounds), (5, 30, 1, 2));
    assert!(serde_json::from_str::<ConfigFile>(r#"{"bogus": 1}"#).is_err());
}

#[test]
fn cli_runs_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bind.json");
    let status = bin()
        .args(["--workers", "2", "bind", "--n", "6", "--trials", "300", "--rounds", "2", "--format", "json"])
        .arg("--out")
        .arg(&out)
        .arg("--omit-wall-time")
        .status()
        .unwrap();
    assert!(status.success());
    let report = ExperimentReport::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!((report.n, report.trials, report.rounds), (6, 300, Some(2)));
    let config = ExperimentConfig { omit_wall_time: true, ..small(Experiment::Bind).with_n(6).with_trials(300) };
    let direct = run_experiment(&ExperimentConfig { master_seed: report.seed, ..config }, 1).unwrap();
    assert_eq!(direct.to_json(), report.to_json());
}

#[test]
fn cli_reads_config_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"n": 4, "trials": 50, "seed": 3, "omit_wall_time": true}"#).unwrap();
    let output = bin().arg("--config").arg(&path).args(["honest", "--trials", "20"]).output().unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    let row: Vec<&str> = stdout.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..7], ["honest", "4", "20", "3", "1", "0", "1"]);
    assert_eq!(row[8], "0");
}

#[test]
fn cli_exit_codes() {
    let code = |args: &[&str]| bin().args(args).output().unwrap().status.code();
    assert_eq!(code(&["honest", "--n", "4", "--trials", "10"]), Some(0));
    assert_eq!(code(&["honest", "--n", "40"]), Some(2));
    assert_eq!(code(&["conceal", "--n", "4", "--r-weight", "4"]), Some(2));
    assert_eq!(code(&["--workers", "0", "honest"]), Some(2));
    assert_eq!(code(&["frobnicate"]), Some(2));
    assert_eq!(code(&["--config", "/nonexistent/cfg.json", "honest"]), Some(2));
    assert_eq!(code(&["honest", "--n", "4", "--trials", "10", "--out", "/nonexistent/dir/x.csv"]), Some(2));
    assert_eq!(code(&["round", "--alice", "nobody"]), Some(2));
    assert_eq!(code(&["oracle", "mlc"]), Some(2));
}

#[test]
fn cli_round_replays() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    let output = bin().args(["round", "--alice", "flip_alice", "--n", "6", "--seed", "12"]).output().unwrap();
    assert!(output.status.success());
    std::fs::write(&path, &output.stdout).unwrap();
    let replay = bin().arg("round").arg("--replay").arg(&path).output().unwrap();
    assert!(replay.status.success());
    assert_eq!(String::from_utf8(replay.stdout).unwrap().trim(), "replay matches");

    let tampered = String::from_utf8(output.stdout).unwrap().replace("\"round_seed\": 12", "\"round_seed\": 13");
    std::fs::write(&path, tampered).unwrap();
    assert_eq!(bin().arg("round").arg("--replay").arg(&path).output().unwrap().status.code(), Some(1));
}

#[test]
fn cli_oracle_prints_exact_values() {
    let output = bin().args(["oracle", "bind", "--n", "4"]).output().unwrap();
    assert_eq!(String::from_utf8(output.stdout).unwrap().trim(), "0.5");
    let output = bin().args(["oracle", "conceal", "--n", "5", "--k", "2"]).output().unwrap();
    assert_eq!(String::from_utf8(output.stdout).unwrap().trim(), "0.625");
}
