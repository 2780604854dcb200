//! Configuration, experiment dispatch and result files.

mod config;
mod csv;
mod experiments;

pub use config::{emit_config, parse_config, ConfigError, Experiment, RunConfig, Value};
pub use csv::{emit_csv, format_real, Cell, CsvError, Table};
pub use experiments::{dispatch, Outcome};

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::exact::ExactError;
use crate::gibbs::GibbsError;
use crate::model::ModelError;
use crate::oracle::OracleError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("exact: {0}")]
    Exact(#[from] ExactError),
    #[error("sampler: {0}")]
    Gibbs(#[from] GibbsError),
    #[error("oracle: {0}")]
    Oracle(#[from] OracleError),
    #[error("analysis: {0}")]
    Analysis(#[from] AnalysisError),
    #[error("csv: {0}")]
    Csv(#[from] CsvError),
    #[error("io: {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("run: {0}")]
    Invalid(String),
}

/// Git blob hash of the canonical config text.
pub fn config_hash(config: &RunConfig) -> String {
    let text = emit_config(config);
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", text.len()).as_bytes());
    h.update(text.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// A finished run: the envelope written to `results.json` and the verdict.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub envelope: serde_json::Value,
    pub files: Vec<PathBuf>,
    pub verdict: Option<bool>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.verdict == Some(false) {
            EXIT_FAIL
        } else {
            EXIT_OK
        }
    }
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf, CliError> {
    std::fs::write(&path, text).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Runs the configured experiment and writes `results.json` plus one CSV per
/// curve into `out`. Files are written only after the computation finishes.
pub fn run(config: &RunConfig, out: &Path) -> Result<RunOutcome, CliError> {
    let started = Instant::now();
    let outcome = dispatch(config)?;
    let total = started.elapsed().as_secs_f64();

    let csvs = outcome
        .tables
        .iter()
        .map(|t| Ok((format!("{}.csv", t.name), emit_csv(t)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut timings = serde_json::Map::new();
    timings.insert("total_seconds".into(), json!(total));
    for (k, v) in &outcome.timings {
        timings.insert(k.clone(), json!(v));
    }
    let echo: serde_json::Map<String, serde_json::Value> = emit_config(config)
        .lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), json!(v)))
        .collect();
    let envelope = json!({
        "experiment": config.experiment().name(),
        "config": echo,
        "config_hash": config_hash(config),
        "payload": outcome.payload,
        "verdict": outcome.verdict.map(|p| if p { "PASS" } else { "FAIL" }),
        "timings": timings,
        "version": env!("CARGO_PKG_VERSION"),
    });

    std::fs::create_dir_all(out).map_err(|source| CliError::Io {
        path: out.to_path_buf(),
        source,
    })?;
    let mut files = Vec::new();
    for (name, text) in &csvs {
        files.push(write(out.join(name), text)?);
    }
    let json_text = serde_json::to_string_pretty(&envelope).expect("envelope serializes") + "\n";
    files.push(write(out.join("results.json"), &json_text)?);
    Ok(RunOutcome {
        envelope,
        files,
        verdict: outcome.verdict,
    })
}
