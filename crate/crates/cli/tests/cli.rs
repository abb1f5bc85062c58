use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinboson"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("SPINBOSON_WORKERS")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.ini");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

/// File contents without the leading timestamp line.
fn body(path: &Path) -> Vec<u8> {
    let bytes = fs::read(path).unwrap();
    assert!(bytes.starts_with(b"# generated_at="));
    let nl = bytes.iter().position(|b| *b == b'\n').unwrap();
    bytes[nl + 1..].to_vec()
}

#[test]
fn spin_check_passes_and_writes_oracle_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["spin-check", "--samples", "20000"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("spin_check.csv")).unwrap();
    let header = csv.lines().nth(2).unwrap();
    assert!(header.contains("oracle") && header.contains("std_error"), "{header}");
    let summary = fs::read_to_string(dir.path().join("spin_check_summary.txt")).unwrap();
    assert!(summary.contains("status=pass"));
    assert!(summary.contains("config_sha256="));
}

#[test]
fn negative_beta_is_a_config_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[physical]\nbeta = -1\n");
    let out = run(dir.path(), &["kernels", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta"));
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[numerics]\nsampels = 10\n");
    let out = run(dir.path(), &["spin-check", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sampels"));
}

#[test]
fn zero_spectral_parameter_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[experiment]\nlambda = 0\n");
    let out = run(dir.path(), &["resolvent", "--config", &cfg, "--samples", "2000"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda"));
}

#[test]
fn csv_bytes_do_not_depend_on_worker_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, workers) in [(&a, "1"), (&b, "3")] {
        let out = run(dir.path(), &["charfun", "--samples", "5000", "--seed", "11", "--workers", workers]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["charfun.csv", "charfun_time.csv", "charfun_summary.txt"] {
        assert_eq!(body(&a.path().join(name)), body(&b.path().join(name)), "{name}");
    }
}
