//! Result persistence: stats tables as CSV, manifests as JSON and the
//! per-replica JSONL log that makes `run` resumable.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const TOOL: &str = "dlattice";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One estimate of one estimator at one parameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRecord {
    pub estimator: String,
    pub param: String,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub replicas: usize,
    pub discarded: usize,
    /// Estimator-specific columns, in table order.
    pub extras: Vec<(String, f64)>,
    /// Seconds spent by the invocation that produced the table.
    pub wall_clock_s: f64,
}

impl StatsRecord {
    /// Rejects intervals that do not contain the estimate.
    pub fn new(
        estimator: &str,
        param: impl ToString,
        (estimate, ci_lo, ci_hi): (f64, f64, f64),
        replicas: usize,
        discarded: usize,
        extras: Vec<(String, f64)>,
    ) -> Result<Self, CliError> {
        if !(ci_lo <= estimate && estimate <= ci_hi) {
            return Err(CliError::Runtime(format!(
                "{estimator}: interval [{ci_lo}, {ci_hi}] does not contain {estimate}"
            )));
        }
        Ok(StatsRecord {
            estimator: estimator.to_string(),
            param: param.to_string(),
            estimate,
            ci_lo,
            ci_hi,
            replicas,
            discarded,
            extras,
            wall_clock_s: 0.0,
        })
    }
}

/// Shortest round-trip decimal; non-finite values become empty fields.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        String::new()
    }
}

/// RFC 4180 CSV with LF line endings: `param,estimate,ci_lo,ci_hi,replicas,discarded`
/// followed by the extras of the first record.
pub fn write_stats_csv(path: &Path, records: &[StatsRecord]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    let mut header: Vec<String> =
        ["param", "estimate", "ci_lo", "ci_hi", "replicas", "discarded"].iter().map(|s| s.to_string()).collect();
    if let Some(first) = records.first() {
        header.extend(first.extras.iter().map(|(k, _)| k.clone()));
    }
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.param.clone(),
            fmt_f64(r.estimate),
            fmt_f64(r.ci_lo),
            fmt_f64(r.ci_hi),
            r.replicas.to_string(),
            r.discarded.to_string(),
        ];
        row.extend(r.extras.iter().map(|(_, v)| fmt_f64(*v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Binds an output directory to the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub outputs: Vec<String>,
    /// Stats of `run`; empty for other commands.
    pub records: Vec<StatsRecord>,
    /// Replicas loaded from an earlier invocation of the same config.
    pub resumed_replicas: u64,
}

impl Manifest {
    pub fn new(command: &str, config: &ExperimentConfig, outputs: Vec<String>) -> Self {
        Manifest {
            tool: TOOL.to_string(),
            version: VERSION.to_string(),
            command: command.to_string(),
            config_hash: config.hash(),
            seed: config.seed,
            outputs,
            records: Vec::new(),
            resumed_replicas: 0,
        }
    }
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.json";

/// Creates the output directory and writes the canonical config into it.
pub fn prepare_out_dir(config: &ExperimentConfig) -> Result<PathBuf, CliError> {
    let dir = config.out_dir.clone();
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join(CONFIG_FILE), config.canonical_json())?;
    Ok(dir)
}

/// Writes the manifest last, so a directory with a manifest is complete.
pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    std::fs::write(dir.join(MANIFEST_FILE), text)?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ReplicaLine<T> {
    replica: u64,
    result: T,
}

/// Append-only log of finished replicas, one JSON object per line. The file
/// name carries the config hash, so a log is only ever resumed by the
/// configuration that wrote it.
pub struct ReplicaStore<T> {
    file: File,
    done: BTreeMap<u64, T>,
}

impl<T: Serialize + DeserializeOwned + Send> ReplicaStore<T> {
    pub fn path(dir: &Path, config_hash: &str) -> PathBuf {
        dir.join(format!("replicas-{}.jsonl", &config_hash[..16]))
    }

    /// Loads completed replicas and drops a torn final line, if any.
    pub fn open(path: &Path) -> Result<Self, CliError> {
        let mut done = BTreeMap::new();
        let mut valid = Vec::new();
        if path.exists() {
            for line in BufReader::new(File::open(path)?).lines() {
                let line = line?;
                let Ok(rec) = serde_json::from_str::<ReplicaLine<T>>(&line) else { break };
                done.entry(rec.replica).or_insert(rec.result);
                valid.push(line);
            }
        }
        let mut file = File::create(path)?;
        for line in &valid {
            writeln!(file, "{line}")?;
        }
        file.flush()?;
        let file = OpenOptions::new().append(true).open(path)?;
        Ok(ReplicaStore { file, done })
    }

    pub fn completed(&self) -> usize {
        self.done.len()
    }

    /// Results of replicas `0..replicas` in index order, computing the
    /// missing ones in parallel and logging each as it finishes.
    pub fn run<F>(mut self, replicas: u64, f: F) -> Result<Vec<T>, CliError>
    where
        F: Fn(u64) -> Result<T, CliError> + Sync,
    {
        let missing: Vec<u64> = (0..replicas).filter(|r| !self.done.contains_key(r)).collect();
        let file = Mutex::new(&mut self.file);
        let fresh: Vec<(u64, T)> = missing
            .into_par_iter()
            .map(|r| {
                let result = f(r)?;
                let line = serde_json::to_string(&ReplicaLine { replica: r, result: &result })?;
                let mut file = file.lock().expect("log writer poisoned");
                writeln!(file, "{line}")?;
                file.flush()?;
                Ok((r, result))
            })
            .collect::<Result<_, CliError>>()?;
        self.done.extend(fresh);
        Ok((0..replicas).filter_map(|r| self.done.remove(&r)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_reject_intervals_missing_the_estimate() {
        assert!(StatsRecord::new("x", 1, (2.0, 0.0, 1.0), 1, 0, vec![]).is_err());
        assert!(StatsRecord::new("x", 1, (0.5, 0.0, 1.0), 1, 0, vec![]).is_ok());
    }

    #[test]
    fn torn_log_lines_are_dropped_and_recomputed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.jsonl");
        std::fs::write(&path, "{\"replica\":0,\"result\":10}\n{\"replica\":1,\"res").unwrap();
        let store = ReplicaStore::<u64>::open(&path).unwrap();
        assert_eq!(store.completed(), 1);
        let out = store.run(3, |r| Ok(100 + r)).unwrap();
        assert_eq!(out, vec![10, 101, 102]);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().all(|l| serde_json::from_str::<serde_json::Value>(l).is_ok()));
    }
}
