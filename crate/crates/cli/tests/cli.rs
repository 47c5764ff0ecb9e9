use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_semiexp"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("semiexp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn rate_reports_transition_value() {
    let v = json(&["rate", "--epsilon", "0.5", "--q", "1", "--sigma2", "1", "--C", "2"]);
    let r = &v["results"]["rates"][0];
    assert!((r["J"].as_f64().unwrap() - 0.336225).abs() < 1e-6);
    assert!((r["t_star"].as_f64().unwrap() - 0.19731).abs() < 1e-5);
    assert_eq!(r["branch"], "AboveCritical");
    assert_eq!(v["provenance"]["seed"], 1);
    assert_eq!(v["config"]["command"], "rate");
}

#[test]
fn invalid_epsilon_exits_with_domain_code() {
    let out = run(&["rate", "--epsilon", "1.5", "--C", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("(0,1)"), "{msg}");
    assert_eq!(msg.lines().count(), 1);
    assert!(out.stdout.is_empty());
}

#[test]
fn missing_and_misplaced_parameters_are_domain_errors() {
    assert_eq!(run(&["rate", "--C", "2"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--epsilon", "0.5", "--n", "10", "--x", "5", "--method", "naive", "--m", "1"]).status.code(), Some(2));
    assert_eq!(run(&["sample", "--epsilon", "0.5", "--q", "1", "--sigma2", "1"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--epsilon", "0.5", "--regime", "gaussian", "--alpha", "0.9", "--n", "10"]).status.code(), Some(2));
    assert_eq!(run(&["rate", "--epsilon", "0.5", "--C", "2", "--threads", "0"]).status.code(), Some(2));
}

#[test]
fn sweep_csv_is_byte_identical() {
    let args = [
        "sweep", "--regime", "transition", "--C", "2", "--epsilon", "0.5", "--n", "100,300", "--samples", "2e3",
        "--seed", "42", "--format", "csv", "--threads", "1",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("# semiexp "));
    assert!(text.contains("# seed: 42\n"));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "n,x_n,log_p_hat,std_err_log,normalized,theory_limit");
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 3);
}

#[test]
fn samples_accept_scientific_notation() {
    let v = json(&["simulate", "--epsilon", "0.5", "--n", "5", "--x", "10", "--method", "naive", "--samples", "1e4"]);
    assert_eq!(v["config"]["samples"], 10_000);
    assert_eq!(v["results"]["num_samples"], 10_000);
}

#[test]
fn config_file_values_yield_to_flags() {
    let path = scratch("rate.toml");
    std::fs::write(&path, "command = \"rate\"\nepsilon = 0.5\nq = 1.0\nsigma2 = 1.0\nC = [2.0]\nseed = 9\n").unwrap();
    let p = path.to_str().unwrap();
    let v = json(&["rate", "--config", p]);
    assert_eq!(v["config"]["seed"], 9);
    assert!((v["results"]["rates"][0]["J"].as_f64().unwrap() - 0.336225).abs() < 1e-6);
    let v = json(&["rate", "--config", p, "--C", "1", "--seed", "3"]);
    assert_eq!(v["config"]["seed"], 3);
    assert_eq!(v["results"]["rates"][0]["J"], 0.5);

    let bad = scratch("bad.json");
    std::fs::write(&bad, r#"{"epsilon": 0.5, "C": [2.0], "colour": 1}"#).unwrap();
    let out = run(&["rate", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));

    let other = scratch("other.json");
    std::fs::write(&other, r#"{"command": "sweep", "epsilon": 0.5}"#).unwrap();
    assert_eq!(run(&["rate", "--config", other.to_str().unwrap(), "--C", "2"]).status.code(), Some(2));
}

#[test]
fn echoed_config_reruns_to_identical_results() {
    let first = json(&["simulate", "--epsilon", "0.5", "--n", "10", "--x", "30", "--samples", "5e3", "--m-max", "3"]);
    let path = scratch("echo.json");
    std::fs::write(&path, serde_json::to_string(&first["config"]).unwrap()).unwrap();
    let second = json(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(first, second);
}

#[test]
fn output_flag_writes_file() {
    let path = scratch("regimes.csv");
    let out = run(&["regimes", "--epsilon", "0.5", "--alpha", "0.55,0.9", "--format", "csv", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("0.55,1.0,gaussian,quadratic,"));
    assert!(text.contains("0.9,1.0,max_jump,tail,-1.0"));
}

#[test]
fn sample_draws_are_seeded_and_conditional_draws_exceed_level() {
    let args = ["sample", "--epsilon", "0.3", "--count", "200", "--kind", "conditional", "--a", "4", "--seed", "5"];
    let a = json(&args);
    let b = json(&args);
    assert_eq!(a, b);
    let xs = a["results"]["samples"].as_array().unwrap();
    assert_eq!(xs.len(), 200);
    assert!(xs.iter().all(|x| x.as_f64().unwrap() >= 4.0));
}

#[test]
fn thread_count_does_not_change_output() {
    let base = ["simulate", "--epsilon", "0.5", "--n", "10", "--x", "30", "--samples", "2e4", "--format", "csv"];
    let one = run(&[&base[..], &["--threads", "1"]].concat());
    let three = run(&[&base[..], &["--threads", "3"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, three.stdout);
}
