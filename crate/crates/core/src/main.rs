use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use revqbc::harness::{
    default_workers, enumerate_oracle, parse_mask, run_experiment, write_report, ConfigFile, Experiment,
    HarnessError, OutputFormat,
};
use revqbc::protocol::{run_round, BitString, ProtocolParams, Transcript};
use revqbc::strategies::{acceptor_from_id, committer_from_id};

#[derive(Parser)]
#[command(name = "revqbc", version, about = "Reverse-communication quantum bit commitment simulator")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// JSON file with default settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Common {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Report wall_time as 0 for byte-reproducible output.
    #[arg(long)]
    omit_wall_time: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Honest parties: fraction of accepted rounds.
    Honest(Common),
    /// Flip-cheating Alice against honest Bob.
    Bind {
        #[command(flatten)]
        common: Common,
        /// Rounds per trial; the cheat succeeds only if every round is accepted.
        #[arg(long)]
        rounds: Option<usize>,
    },
    /// Guessing Bob against honest Alice.
    Conceal {
        #[command(flatten)]
        common: Common,
        /// Weight of the public mask outside the excluded position.
        #[arg(long)]
        r_weight: Option<usize>,
    },
    /// Steering attack against an entangled preparation.
    Mlc(Common),
    /// Remote reduced states under random local measurements.
    Nosig(Common),
    /// Run a single round and print its transcript as JSON.
    Round {
        #[arg(long, default_value = "honest_alice")]
        alice: String,
        #[arg(long, default_value = "honest_bob")]
        bob: String,
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Public mask, e.g. 10110110 (default: all ones).
        #[arg(long)]
        r: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Re-run the round recorded in a transcript file and compare.
        #[arg(long, conflicts_with_all = ["alice", "bob", "n", "r", "seed"])]
        replay: Option<PathBuf>,
    },
    /// Print an exact enumerated value (n <= 6).
    Oracle {
        #[arg(value_enum)]
        experiment: Experiment,
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// Rounds for bind, r-weight for conceal.
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
}

fn flags(common: &Common, rounds: Option<usize>, r_weight: Option<usize>) -> ConfigFile {
    ConfigFile {
        n: common.n,
        trials: common.trials,
        seed: common.seed,
        out: common.out.clone(),
        format: common.format,
        rounds,
        r_weight,
        omit_wall_time: common.omit_wall_time.then_some(true),
        ..ConfigFile::default()
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let (experiment, overrides) = match &cli.command {
        Command::Honest(c) => (Experiment::Honest, flags(c, None, None)),
        Command::Bind { common, rounds } => (Experiment::Bind, flags(common, *rounds, None)),
        Command::Conceal { common, r_weight } => (Experiment::Conceal, flags(common, None, *r_weight)),
        Command::Mlc(c) => (Experiment::Mlc, flags(c, None, None)),
        Command::Nosig(c) => (Experiment::Nosig, flags(c, None, None)),
        Command::Round { alice, bob, n, r, seed, replay } => {
            return round(alice, bob, *n, r.as_deref(), *seed, replay.as_ref());
        }
        Command::Oracle { experiment, n, k } => {
            println!("{}", revqbc::harness::format_real(enumerate_oracle(*experiment, *n, *k)?));
            return Ok(());
        }
    };
    let settings = file.merge(overrides);
    let workers = cli.workers.or(settings.workers).unwrap_or_else(default_workers);
    if workers == 0 {
        return Err(HarnessError::Config("workers must be >= 1".into()));
    }
    let config = settings.resolve(experiment)?;
    let report = run_experiment(&config, workers)?;
    match &config.out {
        Some(path) => write_report(&report, path, config.format)?,
        None => std::io::stdout().write_all(report.render(config.format).as_bytes())?,
    }
    for flag in &report.flags {
        eprintln!("flag: {flag}");
    }
    Ok(())
}

fn round(
    alice: &str,
    bob: &str,
    n: usize,
    r: Option<&str>,
    seed: u64,
    replay: Option<&PathBuf>,
) -> Result<(), HarnessError> {
    if let Some(path) = replay {
        let recorded = Transcript::from_json(&std::fs::read_to_string(path)?)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let alice = committer_from_id(&recorded.alice_strategy)?;
        let bob = acceptor_from_id(&recorded.bob_strategy)?;
        let rerun = run_round(alice.as_ref(), bob.as_ref(), &recorded.params, recorded.round_seed)?;
        if rerun != recorded {
            return Err(HarnessError::Invariant {
                trial: 0,
                seed: recorded.round_seed,
                message: "replayed transcript differs from the recording".into(),
            });
        }
        println!("replay matches");
        return Ok(());
    }
    let r = match r {
        Some(mask) => parse_mask(mask)?,
        None => BitString::ones(n),
    };
    let params = ProtocolParams::new(n, r).map_err(|e| HarnessError::Config(e.to_string()))?;
    let alice = committer_from_id(alice).map_err(|e| HarnessError::Config(e.to_string()))?;
    let bob = acceptor_from_id(bob).map_err(|e| HarnessError::Config(e.to_string()))?;
    let transcript = run_round(alice.as_ref(), bob.as_ref(), &params, seed)?;
    println!("{}", transcript.to_json());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
