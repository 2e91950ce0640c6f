use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_moran-sweep"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data lines of a CSV document, skipping the `#` meta line.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<String> {
    let idx = rows[0].iter().position(|h| h == name).expect("column exists");
    rows[1..].iter().map(|r| r[idx].clone()).collect()
}

#[test]
fn simulate_is_reproducible_and_ordered() {
    let args = ["simulate", "--n", "5,2,3", "--reps", "500", "--seed", "9"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let rows = csv_rows(&stdout(&a));
    assert_eq!(column(&rows, "N"), ["2", "3", "5"]);
    assert!(column(&rows, "seed").iter().all(|s| s == "9"));

    let threaded = run(&[&args[..], &["--threads", "1"]].concat());
    assert_eq!(csv_rows(&stdout(&threaded)), rows);
}

#[test]
fn recur_rational_matches_float() {
    let o = run(&["recur", "--n", "2,3,10", "--mode", "rational"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    let exact = column(&rows, "u_exact");
    assert!(exact.contains(&"121/49".to_string()));
    assert!(exact.contains(&"9/5".to_string()));
    for (f, q) in column(&rows, "u").iter().zip(&exact) {
        let (p, d) = q.split_once('/').unwrap();
        let q = p.parse::<f64>().unwrap() / d.parse::<f64>().unwrap();
        let f: f64 = f.parse().unwrap();
        assert!(((f - q) / q).abs() < 1e-12, "{f} vs {q}");
    }
}

#[test]
fn json_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("asym.json");
    let o = run(&["asym", "--n", "100,1000", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["meta"]["command"], "asym");
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let ratio = rows[1]["ratio"].as_f64().unwrap();
    assert!((ratio - 0.98415).abs() < 1e-4, "{ratio}");
}

#[test]
fn dry_run_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("never.csv");
    let o = run(&["simulate", "--n", "10", "--dry-run", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(!Path::new(&path).exists());
    assert!(stdout(&o).contains("dry run"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# defaults\nn = 4\nreps = 200\nseed = 3\n").unwrap();
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "5"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(column(&rows, "N"), ["4"]);
    assert_eq!(column(&rows, "n_reps"), ["200"]);
    assert_eq!(column(&rows, "seed"), ["5"]);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["simulate", "--n", "1"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["validate", "--only", "matrices"]).status.code(), Some(0));
    // The lemma sandwich needs C of order N, so the bounds group fails its gate.
    let bounds = run(&["validate", "--only", "bounds"]);
    assert_eq!(bounds.status.code(), Some(1));
    assert!(stdout(&bounds).contains("FAIL"));
}

#[test]
fn compare_passes_at_small_n() {
    let o = run(&["compare", "--n", "2,3", "--reps", "20000", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}
