//! Experiment harness: configuration, preset runs, run storage and
//! comparison of stored runs.

pub mod compare;
pub mod config;
pub mod run;
pub mod store;
pub mod table;

use std::path::{Path, PathBuf};

use chrono::Utc;

pub use compare::{compare, Comparison};
pub use config::{ConfigError, ExperimentConfig, Preset};
pub use run::{execute, Outcome, Report};
pub use store::{RunRecord, StoredRun};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Schema(#[from] compare::SchemaMismatch),
    #[error("{0}")]
    Model(#[from] membrane_voter::Error),
    #[error(transparent)]
    Load(#[from] store::LoadError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl HarnessError {
    /// Process exit code: 2 for configuration and schema problems, 3 for
    /// everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Config(_) | HarnessError::Schema(_) | HarnessError::Model(_) => 2,
            _ => 3,
        }
    }
}

pub struct Completed {
    pub dir: PathBuf,
    pub record: RunRecord,
}

/// Runs `cfg` on a pool of `cfg.threads` threads (rayon's default if unset)
/// and stores the artifacts under `root`, or `cfg.output_dir` if set.
pub fn run_and_store(cfg: &ExperimentConfig, root: &Path) -> Result<Completed, HarnessError> {
    let started = Utc::now();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        pool = pool.num_threads(n);
    }
    let outcome = pool.build()?.install(|| execute(cfg))?;
    let root = cfg.output_dir.as_deref().unwrap_or(root);
    let (dir, record) = store::save(root, cfg, &outcome, started)?;
    Ok(Completed { dir, record })
}
