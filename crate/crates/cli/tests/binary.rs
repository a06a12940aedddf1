use std::path::Path;
use std::process::{Command, Output};

fn mvlab(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvlab")).env("MVLAB_RUNS", root).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn gamma_args<'a>(extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec!["run", "--preset", "gamma-estimate", "--d", "2", "--horizon", "2", "--replicas", "2000"];
    v.extend_from_slice(extra);
    v
}

#[test]
fn exit_codes() {
    let root = tempfile::tempdir().unwrap();
    let ok = mvlab(root.path(), &gamma_args(&["--tolerance", "2"]));
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    let strict = mvlab(root.path(), &gamma_args(&["--tolerance", "1e-9"]));
    assert_eq!(code(&strict), 1);
    let bad = mvlab(root.path(), &gamma_args(&["--replicas", "0"]));
    assert_eq!(code(&bad), 2);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("replicas"));
    let typo = mvlab(root.path(), &gamma_args(&["--set", "tolerence=0.1"]));
    assert_eq!(code(&typo), 2);
    let typed = mvlab(root.path(), &gamma_args(&["--seed", "abc"]));
    assert_eq!(code(&typed), 2);
    assert!(String::from_utf8_lossy(&typed.stderr).contains("seed"));
}

#[test]
fn runs_land_under_the_env_root_and_can_be_listed() {
    let root = tempfile::tempdir().unwrap();
    let o = mvlab(root.path(), &gamma_args(&["--tolerance", "2"]));
    let id = String::from_utf8_lossy(&o.stdout).split_whitespace().next().unwrap().to_string();
    assert!(root.path().join(&id).join("record.json").is_file());
    let list = mvlab(root.path(), &["list"]);
    assert!(String::from_utf8_lossy(&list.stdout).contains(&id));
    let show = mvlab(root.path(), &["show", &id]);
    assert_eq!(code(&show), 0);
    let same = mvlab(root.path(), &["compare", &id, &id]);
    assert_eq!(code(&same), 0);

    let m = mvlab(root.path(), &["run", "--preset", "martingale-exact", "--L", "2", "--replicas", "2000"]);
    let mid = String::from_utf8_lossy(&m.stdout).split_whitespace().next().unwrap().to_string();
    assert_eq!(code(&mvlab(root.path(), &["compare", &id, &mid])), 2);

    let elsewhere = tempfile::tempdir().unwrap();
    let out = elsewhere.path().to_str().unwrap();
    let o = mvlab(root.path(), &gamma_args(&["--tolerance", "2", "--seed", "3", "--out", out]));
    let id3 = String::from_utf8_lossy(&o.stdout).split_whitespace().next().unwrap().to_string();
    assert!(elsewhere.path().join(id3).join("report.json").is_file());
}
