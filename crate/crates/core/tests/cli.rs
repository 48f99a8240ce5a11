//! End-to-end tests of the `fracdelay` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_fracdelay");

const NONLINEAR: &str = r#"{
  "problem": {"alpha": 1.6, "beta": 0.4, "lambda": -0.5, "mu": 0.3, "h": 1, "l": 1,
              "phi": [0, 0, 1], "rhs": {"kappa": 0.25, "shape": "sin"}},
  "numerics": {"grid_divisor": 16}
}"#;

const FORCED: &str = r#"{
  "problem": {"alpha": 1.6, "beta": 0.4, "lambda": -0.5, "mu": 0.3, "h": 1, "l": 1,
              "phi": [0, 0, 1], "rhs": {"poly": [0.5, -0.25]}},
  "numerics": {"grid_divisor": 16}
}"#;

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn table(out: &Output) -> Vec<Vec<f64>> {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn json(bytes: &[u8]) -> serde_json::Value {
    serde_json::from_slice(bytes).unwrap()
}

#[test]
fn eval_exponential() {
    let out = run(&[
        "eval",
        "ml",
        "--param",
        "a=1",
        "--param",
        "b=1",
        "--t-start",
        "-2",
        "--t-end",
        "3",
        "--points",
        "11",
    ]);
    for row in table(&out) {
        assert!(
            (row[1] - row[0].exp()).abs() <= 1e-14 * row[0].exp(),
            "{row:?}"
        );
    }
}

#[test]
fn eval_delayed_without_coefficients_is_a_power() {
    let out = run(&[
        "eval",
        "dml-gen",
        "--param",
        "h=1",
        "--param",
        "a=1.2",
        "--param",
        "b=1.6",
        "--param",
        "gamma=1.6",
        "--param",
        "lambda=0",
        "--param",
        "mu=0",
        "--t-start",
        "0.1",
        "--t-end",
        "3",
        "--points",
        "9",
    ]);
    let g = 0.893_515_349_287_69; // Γ(1.6)
    for row in table(&out) {
        let want = row[0].powf(0.6) / g;
        assert!((row[1] - want).abs() < 1e-14, "{row:?}");
    }
}

#[test]
fn kernel_table_matches_golden_file() {
    let golden = format!("{}/tests/golden", env!("CARGO_MANIFEST_DIR"));
    let out = run(&[
        "eval",
        "kernel-main",
        "--config",
        &format!("{golden}/kernel_params.json"),
        "--t-start",
        "-1",
        "--t-end",
        "3",
        "--points",
        "33",
    ]);
    assert!(out.status.success());
    let want = std::fs::read(format!("{golden}/kernel_main.csv")).unwrap();
    assert_eq!(out.stdout, want);
}

#[test]
fn kernel_from_parameters_matches_config() {
    let golden = format!("{}/tests/golden", env!("CARGO_MANIFEST_DIR"));
    let a = run(&[
        "eval",
        "kernel-main",
        "--config",
        &format!("{golden}/kernel_params.json"),
        "--t-end",
        "2",
        "--points",
        "5",
    ]);
    let b = run(&[
        "eval",
        "kernel-main",
        "--param",
        "alpha=1.6",
        "--param",
        "beta=0.4",
        "--param",
        "lambda=-0.5",
        "--param",
        "mu=0.3",
        "--param",
        "h=1",
        "--t-end",
        "2",
        "--points",
        "5",
    ]);
    assert_eq!(table(&a), table(&b));
}

#[test]
fn zero_problem_solves_to_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "zero.json", &NONLINEAR.replace("[0, 0, 1]", "[]"));
    for method in ["picard", "linear"] {
        let out = run(&["solve", "--config", s(&cfg), "--method", method]);
        if method == "linear" {
            // The rhs depends on y, so the linear path refuses it.
            assert_eq!(out.status.code(), Some(1));
            continue;
        }
        assert!(table(&out).iter().all(|r| r[1] == 0.0));
    }
}

#[test]
fn state_free_picard_equals_linear() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "forced.json", FORCED);
    let lin = run(&["solve", "--config", s(&cfg), "--method", "linear"]);
    let pic = run(&["solve", "--config", s(&cfg), "--method", "picard"]);
    assert_eq!(table(&lin), table(&pic));
    let summary = json(&pic.stderr);
    assert_eq!(summary["iterations"], 1);
    assert_eq!(summary["q"], 0.0);
}

#[test]
fn summary_and_csv_files() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "nl.json", NONLINEAR);
    let csv = dir.path().join("y.csv");
    let summary = dir.path().join("s.json");
    let out = run(&[
        "solve",
        "--config",
        s(&cfg),
        "--output",
        s(&csv),
        "--summary",
        s(&summary),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,y\n"));
    assert_eq!(text.lines().count(), 34);
    let sum = json(&std::fs::read(&summary).unwrap());
    assert_eq!(sum["method"], "picard");
    assert!((sum["q"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn compare_zero_data() {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        &dir,
        "zero.json",
        &FORCED
            .replace("[0, 0, 1]", "[]")
            .replace("[0.5, -0.25]", "[]"),
    );
    let out = run(&["compare", "--config", s(&cfg), "--oracle-step", "0.0625"]);
    let rows = table(&out);
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r[3] == 0.0));
}

#[test]
fn compare_pure_power_forcing() {
    let dir = TempDir::new().unwrap();
    let text = FORCED
        .replace("\"lambda\": -0.5", "\"lambda\": 0")
        .replace("\"mu\": 0.3", "\"mu\": 0")
        .replace("[0, 0, 1]", "[]")
        .replace("\"grid_divisor\": 16", "\"grid_divisor\": 64");
    let cfg = config(&dir, "power.json", &text);
    let out = run(&[
        "compare",
        "--config",
        s(&cfg),
        "--oracle-step",
        "0.0009765625",
    ]);
    let summary = json(&out.stderr);
    assert_eq!(summary["method"], "linear");
    assert!(
        summary["max_absdiff"].as_f64().unwrap() <= 1e-3,
        "{summary}"
    );
}

#[test]
fn uh_without_perturbation() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "nl.json", NONLINEAR);
    let out = run(&[
        "uh",
        "--config",
        s(&cfg),
        "--epsilon",
        "0",
        "--gshape",
        "cos:2",
    ]);
    assert!(out.status.success());
    let v = json(&out.stdout);
    assert_eq!(v["lhs"], 0.0);
    assert_eq!(v["pass"], true);
    assert_eq!(v["gshape"], "cos:2");
}

#[test]
fn uh_small_perturbation_holds() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "nl.json", NONLINEAR);
    let out = run(&["uh", "--config", s(&cfg), "--epsilon", "0.01"]);
    let v = json(&out.stdout);
    assert_eq!(v["pass"], true);
    assert!(v["lhs"].as_f64().unwrap() > 0.0);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let unknown = config(
        &dir,
        "unknown.json",
        &NONLINEAR.replace("\"l\": 1", "\"l\": 1, \"extra\": 2"),
    );
    assert_eq!(
        run(&["solve", "--config", s(&unknown)]).status.code(),
        Some(1)
    );
    let bad_beta = config(
        &dir,
        "beta.json",
        &NONLINEAR.replace("\"beta\": 0.4", "\"beta\": 0.7"),
    );
    assert_eq!(
        run(&["solve", "--config", s(&bad_beta)]).status.code(),
        Some(1)
    );
    let divergent = config(
        &dir,
        "omega.json",
        &NONLINEAR.replace(
            "\"grid_divisor\": 16",
            "\"grid_divisor\": 16, \"omega\": 0.1",
        ),
    );
    assert_eq!(
        run(&["solve", "--config", s(&divergent)]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["solve", "--config", "/nonexistent/x.json"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["eval", "ml", "--param", "a=1"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn thread_setting() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "nl.json", NONLINEAR);
    let with = |threads: &str| {
        Command::new(BIN)
            .env("FRACDELAY_THREADS", threads)
            .args(["compare", "--config", s(&cfg), "--oracle-step", "0.015625"])
            .output()
            .unwrap()
    };
    let one = with("1");
    let four = with("4");
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(with("0").status.code(), Some(1));
    assert_eq!(with("many").status.code(), Some(1));
}
