use std::path::Path;
use std::process::{Command, Output};

use limset::cli::tables::Table;
use limset::GridFn;

fn limset(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_limset"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

const DISK: &str = r#"{
  "model": {"kind": "gaussian", "cov": [[1, 0], [0, 1]]},
  "queries": [
    {"type": "point", "id": "inside", "x": [0.3, 0.4]},
    {"type": "point", "id": "outside", "x": [1.2, 0.9]},
    {"type": "product", "x": [0.48, 0.64], "k_sample": [1, 4]},
    {"type": "alpha0"}
  ]
}"#;

#[test]
fn criteria_exits_zero_and_writes_tables() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "disk.json", DISK);
    let o = limset(d.path(), &["--config", "disk.json", "--out", "out", "criteria"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = Table::from_csv(&std::fs::read(d.path().join("out/summary.csv")).unwrap()).unwrap();
    assert_eq!(t.rows.len(), 4);
    for f in ["verdicts.json", "manifest.json"] {
        assert!(d.path().join("out").join(f).is_file(), "{f}");
    }
}

#[test]
fn undecided_verdicts_exit_two() {
    let d = tempfile::tempdir().unwrap();
    write(
        d.path(),
        "edge.json",
        r#"{"model": {"kind": "gaussian", "cov": [[1]]}, "queries": [{"type": "point", "x": [0.99]}]}"#,
    );
    let o = limset(d.path(), &["--quiet", "--config", "edge.json", "criteria"]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
}

#[test]
fn malformed_config_exits_one_with_location() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "bad.json", "{\n  \"model\": {\"kind\": \"gaussian\", \"cov\": [[1]]},\n  \"queries\": [1]\n}");
    let o = limset(d.path(), &["--config", "bad.json", "criteria"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    let o = limset(d.path(), &["criteria"]);
    assert_eq!(code(&o), 1);
    let o = limset(d.path(), &["frobnicate"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn json_flag_emits_a_document() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "disk.json", DISK);
    let o = limset(d.path(), &["--json", "--config", "disk.json", "criteria"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v.is_object());
}

#[test]
fn simulate_defaults_to_runs_hash_dir() {
    let d = tempfile::tempdir().unwrap();
    write(
        d.path(),
        "sim.json",
        r#"{"model": {"kind": "gaussian", "cov": [[1, 0], [0, 1]]}, "simulation": {"n_max": 20000}}"#,
    );
    let o = limset(d.path(), &["--quiet", "--config", "sim.json", "simulate", "--n-max", "5000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let runs: Vec<_> = std::fs::read_dir(d.path().join("runs")).unwrap().collect();
    assert_eq!(runs.len(), 1);
    let run = runs[0].as_ref().unwrap().path();
    let name = run.file_name().unwrap().to_string_lossy().to_string();
    assert_eq!(name.len(), 12);
    assert!(name.chars().all(|c| c.is_ascii_hexdigit()));
    for f in ["report.json", "points.csv", "net.csv", "scatter.svg", "manifest.json"] {
        assert!(run.join(f).is_file(), "{f}");
    }
    let pts = Table::from_csv(&std::fs::read(run.join("points.csv")).unwrap()).unwrap();
    assert_eq!(&pts.header[..2], ["replica", "n"]);
}

#[test]
fn tautstring_ramp_and_errors() {
    let d = tempfile::tempdir().unwrap();
    let ramp = GridFn::scalar_from_fn(8, |t| t).unwrap();
    write(d.path(), "ramp.csv", &ramp.to_csv_string().unwrap());
    let o = limset(d.path(), &["tautstring", "ramp.csv", "--epsilon", "0.25"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("I(g)      = 1.0") && text.contains("I(g_eps)  = 0.5625"), "{text}");
    let o = limset(d.path(), &["tautstring", "ramp.csv", "--epsilon", "3"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("I(g_eps)  = 0"));
    write(d.path(), "junk.csv", "t,g\n0,zero\n");
    assert_eq!(code(&limset(d.path(), &["tautstring", "junk.csv", "--epsilon", "0.1"])), 1);
}

#[test]
fn example8_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let o = limset(d.path(), &["--quiet", "example8", "--k-max", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    write(
        d.path(),
        "bad.json",
        r#"{"model": {"kind": "example8", "star_set": {"segments": [{"sigma": 0.7, "z": [1, 0]}]}}}"#,
    );
    let o = limset(d.path(), &["--config", "bad.json", "example8"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("normalization rule"));
}

#[test]
fn verify_filter_runs_a_subset() {
    let d = tempfile::tempdir().unwrap();
    let o = limset(d.path(), &["--json", "verify", "--filter", "strassen"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["checks"].as_array().unwrap().len(), 3);
}
