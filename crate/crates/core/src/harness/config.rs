use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::protocol::{BitString, ProtocolError};
use crate::quantum::MAX_QUBITS;
use crate::strategies::MLC_MAX_N;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[cfg_attr(feature = "cli", derive(clap::ValueEnum))]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    /// Honest parties; fraction of accepted rounds.
    Honest,
    /// Flip-cheating Alice; fraction of trials where every round is accepted.
    Bind,
    /// Guessing Bob; fraction of correct guesses.
    Conceal,
    /// Steering attack on an entangled preparation.
    Mlc,
    /// Largest change of the remote reduced state under local measurement.
    Nosig,
}

impl Experiment {
    pub const ALL: [Experiment; 5] =
        [Experiment::Honest, Experiment::Bind, Experiment::Conceal, Experiment::Mlc, Experiment::Nosig];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Honest => "honest",
            Experiment::Bind => "bind",
            Experiment::Conceal => "conceal",
            Experiment::Mlc => "mlc",
            Experiment::Nosig => "nosig",
        }
    }

    /// Allowed photon counts (per-side qubit cap for `nosig`).
    pub fn n_range(self) -> (usize, usize) {
        match self {
            Experiment::Honest | Experiment::Bind | Experiment::Conceal => (2, MAX_QUBITS),
            Experiment::Mlc => (2, MLC_MAX_N),
            Experiment::Nosig => (1, MAX_QUBITS / 2),
        }
    }

    pub fn default_n(self) -> usize {
        match self {
            Experiment::Honest | Experiment::Bind => 8,
            Experiment::Conceal | Experiment::Nosig => 6,
            Experiment::Mlc => 3,
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            Experiment::Nosig => 1_000,
            _ => 10_000,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown experiment {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[cfg_attr(feature = "cli", derive(clap::ValueEnum))]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub trials: usize,
    /// Rounds per trial (`bind`).
    pub rounds: usize,
    /// Weight of `r` outside the excluded position (`conceal`).
    pub r_weight: usize,
    pub master_seed: u64,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    /// Report `wall_time` as 0 so output bytes depend only on the config.
    pub omit_wall_time: bool,
}

pub const DEFAULT_SEED: u64 = 20_240_601;

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            n: experiment.default_n(),
            trials: experiment.default_trials(),
            rounds: 1,
            r_weight: 1,
            master_seed: DEFAULT_SEED,
            out: None,
            format: OutputFormat::Csv,
            omit_wall_time: false,
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_rounds(mut self, rounds: usize) -> Self {
        self.rounds = rounds;
        self
    }

    pub fn with_r_weight(mut self, k: usize) -> Self {
        self.r_weight = k;
        self
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let (lo, hi) = self.experiment.n_range();
        if !(lo..=hi).contains(&self.n) {
            return Err(HarnessError::Config(format!(
                "{}: n must be in {lo}..={hi}, got {}",
                self.experiment, self.n
            )));
        }
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be >= 1".into()));
        }
        if self.experiment == Experiment::Bind && self.rounds == 0 {
            return Err(HarnessError::Config("rounds must be >= 1".into()));
        }
        if self.experiment == Experiment::Conceal && self.r_weight >= self.n {
            return Err(HarnessError::Config(format!(
                "conceal: r-weight must be <= n - 1 = {}, got {}",
                self.n - 1,
                self.r_weight
            )));
        }
        Ok(())
    }
}

/// Partial configuration as read from a JSON file; every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: Option<Experiment>,
    pub n: Option<usize>,
    pub trials: Option<usize>,
    pub rounds: Option<usize>,
    pub r_weight: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub workers: Option<usize>,
    pub omit_wall_time: Option<bool>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    /// Fills `self` with any field `overrides` sets.
    pub fn merge(mut self, overrides: ConfigFile) -> ConfigFile {
        macro_rules! take {
            ($($f:ident),*) => { $( if overrides.$f.is_some() { self.$f = overrides.$f; } )* };
        }
        take!(experiment, n, trials, rounds, r_weight, seed, out, format, workers, omit_wall_time);
        self
    }

    pub fn resolve(&self, experiment: Experiment) -> Result<ExperimentConfig, HarnessError> {
        let d = ExperimentConfig::new(experiment);
        let config = ExperimentConfig {
            experiment,
            n: self.n.unwrap_or(d.n),
            trials: self.trials.unwrap_or(d.trials),
            rounds: self.rounds.unwrap_or(d.rounds),
            r_weight: self.r_weight.unwrap_or(d.r_weight),
            master_seed: self.seed.unwrap_or(d.master_seed),
            out: self.out.clone(),
            format: self.format.unwrap_or_default(),
            omit_wall_time: self.omit_wall_time.unwrap_or(false),
        };
        config.validate()?;
        Ok(config)
    }
}

/// Parses a public mask such as `"0110"`.
pub fn parse_mask(s: &str) -> Result<BitString, HarnessError> {
    s.parse().map_err(|e: ProtocolError| HarnessError::Config(e.to_string()))
}
