use std::fs;

use effico::cli::{run, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION};
use serde_json::Value;

fn effico(args: &[&str]) -> (u8, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("effico").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = effico(args);
    assert_eq!(code, EXIT_OK, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn three_state_summary() {
    let v = json(&["three-state", "--x", "1", "--y", "2", "--z", "3", "--all"]);
    assert_eq!(v["summary"]["maximin"], "9/5");
    assert_eq!(v["summary"]["minimax"], "2");
    assert_eq!(v["summary"]["convexified_minimax"], "9/5");
    assert_eq!(v["kkm_intersection"], serde_json::json!(["1/5", "1/5"]));
    assert_eq!(v["perfectly_cost_efficient"], false);
    let minimax = v["problems"].as_array().unwrap().iter().find(|p| p["problem"] == "minimax").unwrap();
    assert_eq!(minimax["optimizers"][0]["Z"], serde_json::json!(["3", "2", "1"]));
    assert_eq!(minimax["optimizers"][0]["boundary"], true);
}

#[test]
fn three_state_single_problem_and_decimals() {
    let v = json(&["three-state", "--x", "1", "--y", "2", "--z", "5", "--problem", "minimax", "--decimal"]);
    let problems = v["problems"].as_array().unwrap();
    assert_eq!(problems.len(), 1);
    assert_eq!(problems[0]["value"], "2.33333333333333");
    assert!(v.get("summary").is_none());
    let frac = json(&["three-state", "--x", "-1/2", "--y", "0", "--z", "1", "--problem", "maximin"]);
    assert_eq!(frac["input"]["x"], "-1/2");
}

#[test]
fn three_state_csv() {
    let (code, out, _) = effico(&["--format", "csv", "three-state", "--x", "1", "--y", "2", "--z", "4"]);
    assert_eq!(code, EXIT_OK);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("problem,value,payoff,kernel,boundary"));
    assert!(out.contains("convexified_minimax,2,\"4 2 1\",\"u in [0 1/3]\",true"));
}

#[test]
fn ordering_violation_exits_2() {
    let (code, out, err) = effico(&["three-state", "--x", "1", "--y", "2", "--z", "2"]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(out.is_empty());
    assert!(err.contains("strictly ordered"), "{err}");
}

#[test]
fn unparsable_and_unknown_arguments_exit_2() {
    assert_eq!(effico(&["three-state", "--x", "a", "--y", "2", "--z", "3"]).0, EXIT_VALIDATION);
    assert_eq!(effico(&["three-state", "--x", "1"]).0, EXIT_VALIDATION);
    assert_eq!(effico(&["frobnicate"]).0, EXIT_VALIDATION);
    assert_eq!(effico(&["utility", "--kind", "power", "--x0", "1"]).0, EXIT_VALIDATION);
    assert_eq!(effico(&["utility", "--kind", "log", "--x0", "-1"]).0, EXIT_VALIDATION);
}

#[test]
fn utility_outputs() {
    let v = json(&["utility", "--kind", "log", "--x0", "1"]);
    assert_eq!(v["payoff"], serde_json::json!([1.5, 1.0, 0.75]));
    let p = json(&["utility", "--kind", "power", "--alpha", "0.5", "--x0", "1"]);
    assert_eq!(p["kind"], "power");
    assert!((p["x_star"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let (code, out, _) = effico(&["utility", "--kind", "exp", "--x0", "1", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("x0,x_star,payoff_1,payoff_2,payoff_3,value\n1,0.768950939"));
}

#[test]
fn solve_from_files_with_seeded_candidates() {
    let dir = tempfile::tempdir().unwrap();
    let market = dir.path().join("market.json");
    let dist = dir.path().join("dist.json");
    fs::write(&market, r#"{"n": 3, "s0": [2.0], "sT": [[4.0, "2", 1.0]]}"#).unwrap();
    fs::write(&dist, r#"{"values": [1, 2, "3"]}"#).unwrap();
    let (m, d) = (market.to_str().unwrap(), dist.to_str().unwrap());
    let v = json(&["solve", "--market", m, "--dist", d, "--seed", "7"]);
    let problems = v["problems"].as_array().unwrap();
    assert_eq!(problems.len(), 4);
    let maximin = problems.iter().find(|p| p["problem"] == "maximin").unwrap();
    assert!((maximin["value"].as_f64().unwrap() - 1.8).abs() < 1e-9);
    assert!(!maximin["candidates"].as_array().unwrap().is_empty());
    let again = json(&["solve", "--market", m, "--dist", d, "--seed", "7"]);
    assert_eq!(v, again);

    fs::write(&dist, r#"{"values": [1, 2]}"#).unwrap();
    let (code, _, err) = effico(&["solve", "--market", m, "--dist", d]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("dimension mismatch"));
    let (code, _, _) = effico(&["solve", "--market", "/nonexistent/market.json", "--dist", d]);
    assert_eq!(code, EXIT_VALIDATION);
}

#[test]
fn stochvol_curve_to_file_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let path = out.to_str().unwrap();
    let args = ["stochvol-curve", "--variances", "0.00000001,0.05,0.1", "--out", path];
    let (code, stdout, _) = effico(&args);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.is_empty());
    let first = fs::read_to_string(&out).unwrap();
    assert!(first.starts_with("variance,cost_normal,cost_lognormal\n"));
    assert_eq!(first.lines().count(), 4);
    effico(&args);
    assert_eq!(fs::read_to_string(&out).unwrap(), first);

    let (code, _, err) = effico(&["stochvol-curve", "--variances", "0.1,0.05"]);
    assert_eq!(code, EXIT_VALIDATION, "{err}");
}

#[test]
fn stochvol_gap_with_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    fs::write(&model, r#"{"mu":0.05,"sigma_h":0.3,"sigma_l":0.15,"p":0.5,"T":1.0,"s0":1.0}"#).unwrap();
    let v = json(&["stochvol-gap", "--model", model.to_str().unwrap()]);
    let gap = v["gap"].as_f64().unwrap();
    assert!(gap > 1e-4, "{v}");
    fs::write(&model, r#"{"mu":0.05,"sigma_h":0.1,"sigma_l":0.15,"p":0.5,"T":1.0,"s0":1.0}"#).unwrap();
    assert_eq!(effico(&["stochvol-gap", "--model", model.to_str().unwrap()]).0, EXIT_VALIDATION);
}

#[test]
fn verify_runs_every_suite() {
    let (code, out, err) = effico(&["verify"]);
    assert_eq!(code, EXIT_OK, "{out}{err}");
    assert!(out.contains(", 0 failed"));
    for suite in ["market", "distribution", "lp", "efficiency", "utility", "stochvol"] {
        assert!(out.contains(&format!("PASS {suite}/")), "{suite}");
    }
    let (code, _, _) = effico(&["verify", "nonsense"]);
    assert_eq!(code, EXIT_VALIDATION);
    let v = json(&["verify", "lp", "--format", "json"]);
    assert_eq!(v["failed"], 0);
}

#[test]
fn exit_code_constants() {
    assert_eq!((EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL), (0, 2, 3));
}
