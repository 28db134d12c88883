use std::path::Path;
use std::process::{Command, Output};

use bdlab::harness::csv::{parse_csv, CSV_HEADER};

fn bdlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bdlab")).args(args).output().expect("spawn bdlab")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.cfg");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn default_verify_succeeds() {
    let out = bdlab(&["verify", "--seed", "0"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# verify seed=0\n"));
    assert!(text.contains("0 failed"));
}

#[test]
fn empty_grid_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "n_spins_min = 6\nn_spins_max = 4\n");
    let out = bdlab(&["verify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("size grid is empty"));
    assert!(out.stdout.is_empty());
}

#[test]
fn unknown_key_and_missing_file_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "temperature = 3\n");
    assert_eq!(bdlab(&["sweep", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(bdlab(&["sweep", "--config", "/nonexistent/run.cfg"]).status.code(), Some(2));
    assert_eq!(bdlab(&["sweep", "--threads", "0"]).status.code(), Some(2));
}

#[test]
fn under_resolved_cutoff_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "fock_cutoff = 2\nlambda = 1.0\nn_spins_min = 2\nn_spins_max = 2\n");
    let out = bdlab(&["verify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("FAIL dicke/V=2/cutoff_convergence")), "{text}");
}

#[test]
fn capacity_overflow_exits_with_numeric_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "representation = full\nn_spins_min = 14\nn_spins_max = 14\nn_max = 1\nk_max = 1\n");
    let out = bdlab(&["sweep", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds the configured maximum"));
}

#[test]
fn sweep_writes_reparseable_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "model = random\nn_spins_min = 3\nn_spins_max = 8\nn_max = 1\nk_max = 2\nbeta = 0.7\n");
    let csv = dir.path().join("out.csv");
    let out = bdlab(&["sweep", "--config", &cfg, "--out", csv.to_str().unwrap(), "--threads", "2", "--seed", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with(CSV_HEADER));
    let rows = parse_csv(&text).unwrap();
    assert!(rows.iter().all(|r| r.model == "random" && r.beta == 0.7));
    assert!(String::from_utf8_lossy(&out.stderr).contains("F_2: exponent"));

    let again = dir.path().join("again.csv");
    bdlab(&["sweep", "--config", &cfg, "--out", again.to_str().unwrap(), "--seed", "4"]);
    assert_eq!(std::fs::read(&csv).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn dicke_suite_and_ahm_gap_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "model = dicke\nn_spins_min = 2\nn_spins_max = 5\nlambda = 0.2\n");
    let suite = bdlab(&["dicke-suite", "--config", &cfg]);
    assert_eq!(suite.status.code(), Some(0), "{}", String::from_utf8_lossy(&suite.stdout));
    let gap = bdlab(&["ahm-gap", "--config", &cfg, "--out", dir.path().join("gap.csv").to_str().unwrap()]);
    assert_eq!(gap.status.code(), Some(0), "{}", String::from_utf8_lossy(&gap.stdout));
    let rows = parse_csv(&std::fs::read_to_string(dir.path().join("gap.csv")).unwrap()).unwrap();
    assert_eq!(rows.iter().filter(|r| r.quantity == "gap").count(), 4);
}

#[test]
fn report_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("report.txt");
    let printed = bdlab(&["verify", "--seed", "3"]).stdout;
    let written = bdlab(&["verify", "--seed", "3", "--out", file.to_str().unwrap()]);
    assert!(written.stdout.is_empty());
    assert_eq!(std::fs::read(&file).unwrap(), printed);
}
