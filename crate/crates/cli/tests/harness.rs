use std::fs;
use std::path::Path;

use mvlab::compare::SchemaMismatch;
use mvlab::config::FieldError;
use mvlab::store::StoredRun;
use mvlab::{compare, run_and_store, ConfigError, ExperimentConfig, HarnessError, Preset};

fn set(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn small_hydro(seed: u64, threads: usize) -> ExperimentConfig {
    let o = set(&[("N", "50"), ("replicas", "3000"), ("tolerance", "0.05"), ("seed", &seed.to_string()), ("threads", &threads.to_string())]);
    ExperimentConfig::build(None, Some(Preset::HydroRobin), &o).unwrap()
}

fn fields(e: ConfigError) -> Vec<FieldError> {
    match e {
        ConfigError::Fields(f) => f,
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn zero_replicas_is_a_field_error() {
    let e = ExperimentConfig::build(None, Some(Preset::GammaEstimate), &set(&[("replicas", "0")])).unwrap_err();
    let f = fields(e);
    assert_eq!(f.len(), 1);
    assert_eq!(f[0].field, "replicas");
}

#[test]
fn unknown_fields_and_presets_are_rejected() {
    let e = ExperimentConfig::build(None, Some(Preset::GammaEstimate), &set(&[("rates.gamma", "1")])).unwrap_err();
    assert_eq!(fields(e)[0].field, "rates.gamma");
    let e = ExperimentConfig::build(None, None, &set(&[("preset", "hydro-fast")])).unwrap_err();
    assert_eq!(fields(e)[0].field, "preset");
    let e = ExperimentConfig::build(None, Some(Preset::HydroSub), &set(&[("rates.beta", "1")])).unwrap_err();
    assert_eq!(fields(e)[0].field, "rates.beta");
}

#[test]
fn file_values_sit_between_defaults_and_flags() {
    let file = serde_json::json!({ "preset": "invariance", "seed": 5, "rates": { "beta": 2.0 } });
    let c = ExperimentConfig::build(Some(&file), None, &[]).unwrap();
    assert_eq!((c.seed, c.rates.alpha, c.rates.beta, c.n), (5, 1.0, 2.0, 200));
    let c = ExperimentConfig::build(Some(&file), None, &set(&[("seed", "6")])).unwrap();
    assert_eq!(c.seed, 6);
}

#[test]
fn run_id_is_stable_under_reserialization_and_tracks_the_seed() {
    let a = small_hydro(1, 1);
    let text = serde_json::to_string_pretty(&a).unwrap();
    let file: serde_json::Value = serde_json::from_str(&text).unwrap();
    let b = ExperimentConfig::build(Some(&file), None, &[]).unwrap();
    assert_eq!(a.run_id(), b.run_id());
    assert_ne!(a.run_id(), small_hydro(2, 1).run_id());
    assert_eq!(a.run_id(), small_hydro(1, 4).run_id());
}

fn bytes(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap()
}

#[test]
fn hydro_runs_are_reproducible_and_comparable() {
    let root_a = tempfile::tempdir().unwrap();
    let root_b = tempfile::tempdir().unwrap();
    let a = run_and_store(&small_hydro(1, 1), root_a.path()).unwrap();
    let b = run_and_store(&small_hydro(1, 3), root_b.path()).unwrap();
    assert_eq!(a.record.run_id, b.record.run_id);
    assert!(a.record.pass, "{}", a.record.summary);
    // Thread count is recorded in config.json but changes nothing else.
    for f in ["report.json", "profile.csv"] {
        assert_eq!(bytes(&a.dir, f), bytes(&b.dir, f), "{f}");
    }
    let root_c = tempfile::tempdir().unwrap();
    let again = run_and_store(&small_hydro(1, 1), root_c.path()).unwrap();
    for f in ["config.json", "report.json", "profile.csv"] {
        assert_eq!(bytes(&a.dir, f), bytes(&again.dir, f), "{f}");
    }
    assert_eq!(a.record.artifacts, ["config.json", "report.json", "profile.csv"]);

    let sa = StoredRun::load(&a.dir).unwrap();
    let table = &sa.tables[0].1;
    assert_eq!(table.rows.len(), 21);
    let sup = table.column("gap").unwrap().into_iter().fold(0.0, f64::max);
    assert_eq!(sa.report.estimates["sup_gap"], sup);

    let same = compare(&sa, &StoredRun::load(&b.dir).unwrap()).unwrap();
    assert!(same.consistent);
    assert!(same.diffs.iter().all(|d| d.max_abs == 0.0 && d.max_rel == 0.0));

    let c = run_and_store(&small_hydro(7, 2), root_a.path()).unwrap();
    assert_ne!(c.record.run_id, a.record.run_id);
    let other = compare(&sa, &StoredRun::load(&c.dir).unwrap()).unwrap();
    assert!(other.consistent, "{other:?}");
    let mc = other.diffs.iter().find(|d| d.column == "mc").unwrap();
    assert!(mc.max_abs > 0.0 && mc.within == Some(true));
    let pde = other.diffs.iter().find(|d| d.column == "pde").unwrap();
    assert_eq!(pde.max_abs, 0.0);
    assert_eq!(mvlab::store::list(root_a.path()).unwrap().len(), 2);
}

#[test]
fn comparing_different_presets_is_a_schema_error() {
    let root = tempfile::tempdir().unwrap();
    let g = ExperimentConfig::build(None, Some(Preset::GammaEstimate), &set(&[("d", "2"), ("horizon", "2"), ("replicas", "1000")])).unwrap();
    let m = ExperimentConfig::build(None, Some(Preset::MartingaleExact), &set(&[("replicas", "2000"), ("L", "2")])).unwrap();
    let a = StoredRun::load(&run_and_store(&g, root.path()).unwrap().dir).unwrap();
    let b = StoredRun::load(&run_and_store(&m, root.path()).unwrap().dir).unwrap();
    let e = compare(&a, &b).unwrap_err();
    assert!(matches!(e, SchemaMismatch::Preset(..)));
    assert_eq!(HarnessError::from(e).exit_code(), 2);
}

#[test]
fn two_step_return_probability_in_the_plane() {
    // Returning within 2 steps on Z^2: the second step reverses the first.
    let root = tempfile::tempdir().unwrap();
    let g = ExperimentConfig::build(None, Some(Preset::GammaEstimate), &set(&[("d", "2"), ("horizon", "2"), ("replicas", "40000"), ("tolerance", "1")]))
        .unwrap();
    let r = StoredRun::load(&run_and_store(&g, root.path()).unwrap().dir).unwrap();
    let (m, se) = (r.report.estimates["gamma"], r.report.stderr["gamma"]);
    assert!((m - 0.25).abs() < 4.0 * se, "{m} +- {se}");
}

#[test]
fn martingale_preset_passes_on_a_small_ring() {
    let root = tempfile::tempdir().unwrap();
    let m = ExperimentConfig::build(None, Some(Preset::MartingaleExact), &set(&[("replicas", "20000"), ("L", "2")])).unwrap();
    let done = run_and_store(&m, root.path()).unwrap();
    assert!(done.record.pass, "{}", done.record.summary);
}
