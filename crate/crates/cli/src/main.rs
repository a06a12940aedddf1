use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mvlab::store::{self, StoredRun};
use mvlab::{compare, ConfigError, ExperimentConfig, HarnessError, Preset};

/// Experiments for the voter model with a slow membrane.
///
/// Exit codes: 0 pass, 1 tolerance failure, 2 configuration or schema
/// error, 3 other errors.
#[derive(Parser)]
#[command(name = "mvlab", version)]
struct Cli {
    /// Root directory of stored runs (default: $MVLAB_RUNS, then ./runs).
    #[arg(long, global = true)]
    root: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and store its artifacts.
    Run(RunArgs),
    /// Compare two stored runs column by column.
    Compare { left: String, right: String },
    /// List stored runs.
    List,
    /// Print the record and report of a stored run.
    Show { run: String },
    /// Print the default configuration of a preset.
    Defaults { preset: String },
}

/// Flags override the config file; field names follow the config schema.
#[derive(Args)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long = "N")]
    n: Option<String>,
    #[arg(long = "L")]
    l: Option<String>,
    #[arg(long = "rates.alpha")]
    alpha: Option<String>,
    #[arg(long = "rates.beta")]
    beta: Option<String>,
    #[arg(long)]
    t: Option<String>,
    /// Initial profile as JSON, e.g. '{"kind":"constant","value":0.3}'.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    replicas: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    tolerance: Option<String>,
    #[arg(long)]
    horizon: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    /// Directory for this run's artifacts root (config field `output_dir`).
    #[arg(long)]
    out: Option<String>,
    /// Any other field, as `path=value`.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    fn overrides(&self) -> Result<Vec<(String, String)>, ConfigError> {
        let mut out = Vec::new();
        for s in &self.set {
            let (k, v) = s.split_once('=').ok_or_else(|| {
                ConfigError::Fields(vec![mvlab::config::FieldError { field: s.clone(), message: "expected PATH=VALUE".into() }])
            })?;
            out.push((k.to_string(), v.to_string()));
        }
        let flags = [
            ("preset", &self.preset),
            ("d", &self.d),
            ("N", &self.n),
            ("L", &self.l),
            ("rates.alpha", &self.alpha),
            ("rates.beta", &self.beta),
            ("t", &self.t),
            ("profile", &self.profile),
            ("replicas", &self.replicas),
            ("seed", &self.seed),
            ("tolerance", &self.tolerance),
            ("horizon", &self.horizon),
            ("threads", &self.threads),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                out.push((k.to_string(), v.clone()));
            }
        }
        if let Some(o) = &self.out {
            out.push(("output_dir".into(), serde_json::Value::String(o.clone()).to_string()));
        }
        Ok(out)
    }

    fn config(&self) -> Result<ExperimentConfig, HarnessError> {
        let file = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(ConfigError::Io)?;
                let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
                    ConfigError::Fields(vec![mvlab::config::FieldError { field: "<root>".into(), message: format!("{}: {e}", p.display()) }])
                })?;
                Some(v)
            }
            None => None,
        };
        Ok(ExperimentConfig::build(file.as_ref(), None, &self.overrides()?)?)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn dispatch(cli: Cli) -> Result<u8, HarnessError> {
    let root = store::runs_root(cli.root.as_deref());
    match cli.command {
        Command::Run(args) => {
            let cfg = args.config()?;
            let done = mvlab::run_and_store(&cfg, &root)?;
            let verdict = if done.record.pass { "PASS" } else { "FAIL" };
            println!("{} {} {verdict}: {}", done.record.run_id, cfg.preset, done.record.summary);
            println!("artifacts in {}", done.dir.display());
            Ok(if done.record.pass { 0 } else { 1 })
        }
        Command::Compare { left, right } => {
            let a = StoredRun::load(&store::locate(&root, &left))?;
            let b = StoredRun::load(&store::locate(&root, &right))?;
            let c = compare(&a, &b)?;
            println!("{}", pretty(&c));
            Ok(if c.consistent { 0 } else { 1 })
        }
        Command::List => {
            for r in store::list(&root)? {
                println!("{}  {:<17} {}  {}", r.run_id, r.config.preset.name(), if r.pass { "PASS" } else { "FAIL" }, r.finished);
            }
            Ok(0)
        }
        Command::Show { run } => {
            let s = StoredRun::load(&store::locate(&root, &run))?;
            println!("{}", pretty(&s.record));
            println!("{}", pretty(&s.report));
            Ok(0)
        }
        Command::Defaults { preset } => {
            let p = Preset::parse(&preset).ok_or_else(|| {
                ConfigError::Fields(vec![mvlab::config::FieldError { field: "preset".into(), message: format!("unknown preset `{preset}`") }])
            })?;
            println!("{}", pretty(&ExperimentConfig::defaults(p)));
            Ok(0)
        }
    }
}
