use std::path::Path;
use std::process::{Command, Output};

use quasiflow::record::{self, RunRecord};

fn quasiflow(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quasiflow"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn load(path: &Path) -> RunRecord {
    record::load_run(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn shoot_writes_a_record_and_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = quasiflow(&["shoot", "--dim", "1", "--nr", "600"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rec = load(&dir.path().join("shoot.json"));
    assert!((rec.scalars["w0"] - 2f64.sqrt()).abs() < 1e-6);
    assert_eq!(rec.series_files, vec!["shoot_profile.csv"]);

    let verify = Command::new(env!("CARGO_BIN_EXE_quasiflow"))
        .arg("verify")
        .arg("--stored")
        .arg(dir.path().join("shoot.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(verify.status.success(), "{}", String::from_utf8_lossy(&verify.stdout));
    let checks = load(&dir.path().join("verify.json")).checks;
    assert!(checks.len() >= 5 && checks.iter().all(|c| c.passed));
}

#[test]
fn evolve_zero_amplitude_vanishes() {
    let dir = tempfile::tempdir().unwrap();
    let out = quasiflow(&["evolve", "--lambda", "0", "--nr", "300"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rec = load(&dir.path().join("evolve.json"));
    assert_eq!(rec.classification.as_deref(), Some("Vanish"));

    let series = std::fs::read_to_string(dir.path().join("evolve_series.csv")).unwrap();
    assert_eq!(series.lines().next(), Some("t,sup_norm,I,dt"));
}

#[test]
fn records_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let out = quasiflow(&["evolve", "--lambda", "0.5", "--nr", "300", "--tmax", "3"], dir.path());
    assert!(out.status.success());
    let bytes = std::fs::read(dir.path().join("evolve.json")).unwrap();
    let rec = record::load_run(&bytes).unwrap();
    assert_eq!(record::serialize_run(&rec).unwrap(), bytes);
}

#[test]
fn inadmissible_profile_is_a_precondition_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = quasiflow(
        &["bisect", "--profile", "gauss:1", "--nr", "300", "--iters", "2"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("bisect.json").exists());
}

#[test]
fn bad_flags_exit_with_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(quasiflow(&["evolve", "--profile", "cone:1"], dir.path()).status.code(), Some(2));
    assert_eq!(quasiflow(&["shoot", "--tol", "1e-2"], dir.path()).status.code(), Some(2));
    assert_eq!(quasiflow(&["evolve", "--dim", "0"], dir.path()).status.code(), Some(2));
    let help = Command::new(env!("CARGO_BIN_EXE_quasiflow")).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn file_profile_is_interpolated() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("phi.csv");
    std::fs::write(&table, "r,value\n0,0.2\n5,0.1\n10,0\n").unwrap();
    let spec = format!("file:{}", table.display());
    let out = quasiflow(&["evolve", "--profile", &spec, "--lambda", "1", "--nr", "300"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rec = load(&dir.path().join("evolve.json"));
    assert_eq!(rec.classification.as_deref(), Some("Vanish"));
}
