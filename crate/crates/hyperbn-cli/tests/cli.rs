use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperbn")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

fn find<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["results"].as_array().unwrap().iter().find(|r| r["name"] == name).unwrap_or_else(|| panic!("{name} missing"))
}

#[test]
fn constants_report() {
    let out = run(&["constants", "--n", "5", "--k", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["command"], "constants");
    assert_eq!(find(&r, "LAMBDA_BAR")["value"], 0.5625);
    let s = find(&r, "SOBOLEV")["value"].as_f64().unwrap();
    let want = 105.0 / 16.0 * std::f64::consts::PI.powi(3).powf(0.8);
    assert!((s - want).abs() / want < 1e-12);
    assert!(r["results"].as_array().unwrap().iter().any(|x| x["name"] == "HLS_TABLE"));
}

#[test]
fn output_is_byte_deterministic() {
    let a = run(&["constants", "--n", "6", "--k", "2", "--R", "0.5"]);
    let b = run(&["constants", "--n", "6", "--k", "2", "--R", "0.5"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn lambda_star_reports_both_methods_and_their_disagreement() {
    let out = run(&["lambda-star", "--n", "5", "--R", "0.5", "--method", "both"]);
    let r = json(&out);
    let methods: Vec<&str> =
        r["results"].as_array().unwrap().iter().filter_map(|x| x["method"].as_str()).collect();
    assert_eq!(methods, ["DETERMINANT", "QUOTIENT"]);
    let gap = find(&r, "CROSS_CHECK_GAP");
    assert_eq!(gap["agree"], false);
    // the failed cross-check is a certification failure
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_is_ordered_and_independent_of_worker_count() {
    let args = ["sweep", "--n", "5", "--k", "2", "--R", "0.5", "--lambda-from", "400", "--lambda-to", "520", "--steps", "3"];
    let one = run(&[&args[..], &["--format", "csv", "--parallel", "1"]].concat());
    let two = run(&[&args[..], &["--format", "csv", "--parallel", "2"]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, two.stdout);
    let text = String::from_utf8(one.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("lambda,found,nehari_level,pohozaev_gap"));
    let lambdas: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(lambdas, [400.0, 440.0, 480.0, 520.0]);
}

#[test]
fn sweep_below_the_branch_reports_no_solutions_as_tsv() {
    let out = run(&[
        "sweep", "--n", "5", "--k", "2", "--R", "0.5", "--lambda-from", "0", "--lambda-to", "0.56", "--steps", "4",
        "--format", "tsv",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r[1] == "false"));
}

#[test]
fn transform_check_passes() {
    let out = run(&["transform-check", "--n", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert!(r["results"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn solve_writes_profile_to_file() {
    let dir = std::env::temp_dir().join(format!("hyperbn-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("profile.csv");
    let out = run(&["solve", "--n", "5", "--k", "2", "--R", "0.5", "--lambda", "450", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("r,v,dv,lap_v,rho,u\n"));
    assert!(text.lines().count() > 100);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(run(&["eigen", "--n", "5", "--k", "2", "--R", "0.5", "--grid", "50"]).status.code(), Some(1));
    assert_eq!(run(&["eigen", "--n", "5", "--k", "2", "--R", "1.5"]).status.code(), Some(1));
    assert_eq!(run(&["constants", "--n", "4", "--k", "2"]).status.code(), Some(1));
    assert_eq!(run(&["transform-check", "--n", "5", "--tol", "0"]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
}

#[test]
fn help_exits_cleanly() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("transform-check"));
}
