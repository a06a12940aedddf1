//! Run directories: `<root>/<run_id>/` holding the config, report, tables
//! and a run record. Every file is written to a temporary file in the same
//! directory and renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;

use crate::config::ExperimentConfig;
use crate::run::{Outcome, Report};
use crate::table::Table;

pub const RUNS_ENV: &str = "MVLAB_RUNS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub config: ExperimentConfig,
    pub started: String,
    pub finished: String,
    pub artifacts: Vec<String>,
    pub pass: bool,
    pub summary: String,
}

/// Output root: explicit path, then `MVLAB_RUNS`, then `./runs`.
pub fn runs_root(explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    std::env::var_os(RUNS_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"))
}

pub fn timestamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(dir.join(name)).map_err(|e| e.error)?;
    Ok(())
}

fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut b = serde_json::to_vec_pretty(v).expect("serializable");
    b.push(b'\n');
    b
}

/// Writes all artifacts of a finished run and returns its record.
pub fn save(root: &Path, cfg: &ExperimentConfig, outcome: &Outcome, started: DateTime<Utc>) -> std::io::Result<(PathBuf, RunRecord)> {
    let run_id = cfg.run_id();
    let dir = root.join(&run_id);
    fs::create_dir_all(&dir)?;
    let mut artifacts = vec!["config.json".to_string(), "report.json".to_string()];
    write_atomic(&dir, "config.json", &json_bytes(cfg))?;
    write_atomic(&dir, "report.json", &json_bytes(&outcome.report))?;
    for (name, table) in &outcome.tables {
        let file = format!("{name}.csv");
        let mut buf = Vec::new();
        table.write(&mut buf).map_err(std::io::Error::other)?;
        write_atomic(&dir, &file, &buf)?;
        artifacts.push(file);
    }
    let record = RunRecord {
        run_id,
        config: cfg.clone(),
        started: timestamp(started),
        finished: timestamp(Utc::now()),
        artifacts,
        pass: outcome.report.pass,
        summary: outcome.summary.clone(),
    };
    write_atomic(&dir, "record.json", &json_bytes(&record))?;
    Ok((dir, record))
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

fn read(path: PathBuf) -> Result<Vec<u8>, LoadError> {
    fs::read(&path).map_err(|source| LoadError::Io { path, source })
}

fn read_json<T: for<'de> Deserialize<'de>>(path: PathBuf) -> Result<T, LoadError> {
    let bytes = read(path.clone())?;
    serde_json::from_slice(&bytes).map_err(|source| LoadError::Json { path, source })
}

/// A stored run, loaded back from its directory.
#[derive(Clone, Debug)]
pub struct StoredRun {
    pub dir: PathBuf,
    pub record: RunRecord,
    pub report: Report,
    pub tables: Vec<(String, Table)>,
}

impl StoredRun {
    pub fn load(dir: &Path) -> Result<Self, LoadError> {
        let record: RunRecord = read_json(dir.join("record.json"))?;
        let report: Report = read_json(dir.join("report.json"))?;
        let mut tables = Vec::new();
        for a in &record.artifacts {
            if let Some(name) = a.strip_suffix(".csv") {
                let path = dir.join(a);
                let bytes = read(path.clone())?;
                let t = Table::read(bytes.as_slice()).map_err(|source| LoadError::Csv { path, source })?;
                tables.push((name.to_string(), t));
            }
        }
        Ok(Self { dir: dir.to_path_buf(), record, report, tables })
    }
}

/// Resolves a run given as a directory or as a run id under `root`.
pub fn locate(root: &Path, run: &str) -> PathBuf {
    let p = Path::new(run);
    if p.join("record.json").is_file() {
        p.to_path_buf()
    } else {
        root.join(run)
    }
}

/// Records of all runs under `root`, sorted by finish time.
pub fn list(root: &Path) -> std::io::Result<Vec<RunRecord>> {
    let mut out = Vec::new();
    let entries = match fs::read_dir(root) {
        Ok(e) => e,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(out),
        Err(e) => return Err(e),
    };
    for entry in entries {
        let path = entry?.path().join("record.json");
        if let Ok(r) = read_json::<RunRecord>(path) {
            out.push(r);
        }
    }
    out.sort_by(|a, b| a.finished.cmp(&b.finished).then_with(|| a.run_id.cmp(&b.run_id)));
    Ok(out)
}
