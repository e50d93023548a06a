use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Experiment, ExperimentConfig, HarnessError, OutputFormat};

pub const CSV_HEADER: &str = "experiment,n,trials,seed,estimate,stderr,exact,aborts,wall_time";

/// Aggregated result of one experiment. Reals are stored rounded to 12
/// significant digits, so serialization is exact and stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: Experiment,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rounds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub r_weight: Option<usize>,
    pub estimate: f64,
    pub stderr: f64,
    pub exact: Option<f64>,
    pub aborts: u64,
    pub wall_time: f64,
    #[serde(default)]
    pub diagnostics: BTreeMap<String, f64>,
    #[serde(default)]
    pub flags: Vec<String>,
}

/// Rounds to 12 significant digits.
pub fn quantize(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// `%.12g`-style rendering of an already quantized value.
pub fn format_real(x: f64) -> String {
    let q = quantize(x);
    if q == 0.0 {
        return "0".into();
    }
    let exp = q.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        format!("{q}")
    } else {
        format!("{q:e}")
    }
}

impl ExperimentReport {
    /// An empty report echoing `config`.
    pub fn for_config(config: &ExperimentConfig) -> Self {
        ExperimentReport {
            experiment: config.experiment,
            n: config.n,
            trials: config.trials,
            seed: config.master_seed,
            rounds: (config.experiment == Experiment::Bind).then_some(config.rounds),
            r_weight: (config.experiment == Experiment::Conceal).then_some(config.r_weight),
            estimate: 0.0,
            stderr: 0.0,
            exact: None,
            aborts: 0,
            wall_time: 0.0,
            diagnostics: BTreeMap::new(),
            flags: Vec::new(),
        }
    }

    pub fn diagnostic(&mut self, key: &str, value: f64) {
        self.diagnostics.insert(key.to_string(), quantize(value));
    }

    /// Quantizes every real and flags oracle disagreement beyond three
    /// standard errors.
    pub fn finalize(&mut self) {
        self.estimate = quantize(self.estimate);
        self.stderr = quantize(self.stderr);
        self.exact = self.exact.map(quantize);
        self.wall_time = quantize(self.wall_time);
        for v in self.diagnostics.values_mut() {
            *v = quantize(*v);
        }
        if let Some(exact) = self.exact {
            if (self.estimate - exact).abs() > 3.0 * self.stderr + 1e-12 {
                self.flags.push(format!(
                    "oracle_disagreement: |{} - {}| > 3 * {}",
                    format_real(self.estimate),
                    format_real(exact),
                    format_real(self.stderr)
                ));
            }
        }
    }

    pub fn within_three_sigma(&self) -> Option<bool> {
        self.exact.map(|e| (self.estimate - e).abs() <= 3.0 * self.stderr + 1e-12)
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.n,
            self.trials,
            self.seed,
            format_real(self.estimate),
            format_real(self.stderr),
            self.exact.map(format_real).unwrap_or_default(),
            self.aborts,
            format_real(self.wall_time)
        )
    }

    pub fn to_csv(&self) -> String {
        format!("{CSV_HEADER}\n{}\n", self.csv_row())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

/// Writes `report` to `path` in `format`.
pub fn write_report(report: &ExperimentReport, path: &Path, format: OutputFormat) -> Result<(), HarnessError> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(report.render(format).as_bytes())?;
    Ok(())
}
