use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nodal-census"));
    c.env_remove("NODAL_CENSUS_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nodal-census-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn goe_reports_and_usage_errors() {
    let out = run(&["goe", "--N", "5", "--B", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["value"], 1.0);
    assert_eq!(v["module"], "rmt");
    assert_eq!(v["seed"], 0);

    let out = run(&["goe", "--N", "3", "--B", "1"]);
    let value = json(&out)["result"]["value"].as_f64().unwrap();
    assert!((value - 1.0 / 6f64.sqrt()).abs() < 0.01 / 6f64.sqrt());

    assert_eq!(run(&["goe", "--N", "3"]).status.code(), Some(1));
    assert_eq!(run(&["goe", "--N", "1", "--B", "1"]).status.code(), Some(1));
    assert_eq!(run(&["nonsense"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn predict_constants() {
    let v = json(&run(&["predict", "--kind", "kostlan", "--n", "2"]));
    let b = v["result"]["bound"]["bound_projective"].as_f64().unwrap();
    assert!((b - 2.0 / 3f64.sqrt()).abs() < 1e-12);

    let v = json(&run(&["predict", "--kind", "rfs", "--n", "2", "--d", "300"]));
    let m = v["result"]["entries"][0]["extrema"]["minima_full"].as_f64().unwrap() / 300f64.powi(2);
    assert!((m / (1.0 / (3.0 * 3f64.sqrt())) - 1.0).abs() < 0.03, "{m}");

    let v = json(&run(&["predict", "--kind", "harmonic", "--n", "1", "--d", "200"]));
    assert!(v["result"]["bound"].is_null());
    let x = v["result"]["entries"][0]["extrema"]["extrema_full"].as_f64().unwrap() / 200.0;
    assert!((x - 2.0).abs() < 0.04, "{x}");

    assert_eq!(run(&["predict", "--kind", "harmonic", "--n", "2"]).status.code(), Some(1));
}

#[test]
fn simulate_is_deterministic_and_thread_independent() {
    let a = scratch("a.csv");
    let b = scratch("b.csv");
    let args = ["simulate", "--kind", "kostlan", "--n", "1", "--d", "25", "--trials", "400", "--seed", "5"];
    let out_a = bin().args(args).args(["--csv", a.to_str().unwrap(), "--threads", "1"]).output().unwrap();
    let out_b = bin().args(args).args(["--csv", b.to_str().unwrap()]).output().unwrap();
    assert_eq!(out_a.status.code(), Some(0));
    assert_eq!(out_a.stdout, out_b.stdout);
    let (ca, cb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ca, cb);
    let text = String::from_utf8(ca).unwrap();
    assert_eq!(text.lines().next(), Some("d,trial,seed,count,flagged"));
    assert_eq!(text.lines().count(), 401);

    let v = json(&out_a);
    let mean = v["result"][0]["census"]["mean"].as_f64().unwrap();
    let se = v["result"][0]["census"]["stderr"].as_f64().unwrap();
    assert!((mean - 10.0).abs() < 4.0 * se, "{mean} ± {se}");
    assert!((v["result"][0]["two_delta"].as_f64().unwrap() - 10.0).abs() < 1e-10);
}

#[test]
fn simulate_nodal_components_csv_rows() {
    let path = scratch("rfs.csv");
    let out = run(&[
        "simulate", "--kind", "rfs", "--n", "2", "--d", "12", "--trials", "300", "--csv", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 301);
    assert_eq!(json(&out)["result"][0]["census"]["observable"], "nodal_components");
}

#[test]
fn config_file_env_and_flag_precedence() {
    let cfg = scratch("goe.json");
    std::fs::write(&cfg, r#"{"command": "goe", "N": 2, "B": 1.0, "samples": 2000, "seed": 11}"#).unwrap();
    let c = cfg.to_str().unwrap();

    let v = json(&run(&["goe", "--config", c]));
    assert_eq!((v["seed"].as_u64(), v["samples"].as_u64()), (Some(11), Some(2000)));

    let v = json(&run(&["goe", "--config", c, "--seed", "3", "--samples", "1000"]));
    assert_eq!((v["seed"].as_u64(), v["samples"].as_u64()), (Some(3), Some(1000)));

    let out = bin().args(["goe", "--config", c]).env("NODAL_CENSUS_SEED", "42").output().unwrap();
    assert_eq!(json(&out)["seed"], 42);

    let out = bin().args(["goe", "--N", "2", "--B", "1", "--samples", "500"]).env("NODAL_CENSUS_SEED", "8").output().unwrap();
    assert_eq!(json(&out)["seed"], 8);

    assert_eq!(run(&["predict", "--config", c]).status.code(), Some(1));
    let bad = scratch("bad.json");
    std::fs::write(&bad, r#"{"N": 2, "colour": 1}"#).unwrap();
    assert_eq!(run(&["goe", "--config", bad.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["goe", "--config", "/nonexistent/cfg.json"]).status.code(), Some(1));
}

#[test]
fn json_output_file_matches_stdout() {
    let path = scratch("goe-out.json");
    let out = run(&["goe", "--N", "2", "--B", "0.5", "--samples", "1000", "--json", path.to_str().unwrap()]);
    let file = std::fs::read_to_string(&path).unwrap();
    assert_eq!(file, String::from_utf8(out.stdout).unwrap());
    let positions: Vec<usize> = ["\"module\"", "\"operation\"", "\"seed\"", "\"samples\"", "\"result\""]
        .iter()
        .map(|k| file.find(k).unwrap())
        .collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn barrier_report_fields() {
    let out = run(&["barrier", "--kind", "rfs", "--n", "2", "--d-list", "20,40", "--trials", "200"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let est = &v["result"]["estimates"];
    assert_eq!(est.as_array().unwrap().len(), 2);
    for key in ["d", "r", "band", "p_omega", "stderr", "trials"] {
        assert!(!est[0][key].is_null(), "missing {key}");
    }
    assert!(v["result"]["margins"]["common_margin"].as_f64().unwrap() > 0.0);
    let out = run(&["barrier", "--kind", "rfs", "--n", "2", "--d", "20", "--band", "1.0,0.5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn validate_quick_exit_code_reflects_table() {
    let out = run(&["validate", "--quick"]);
    let table = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = table.lines().filter(|l| l.starts_with('[')).collect();
    assert_eq!(lines.len(), 13);
    let any_fail = lines.iter().any(|l| l.starts_with("[FAIL]"));
    assert_eq!(out.status.code(), Some(if any_fail { 3 } else { 0 }));
    assert!(lines.iter().any(|l| l.starts_with("[SKIP] criterion  9")));
}
