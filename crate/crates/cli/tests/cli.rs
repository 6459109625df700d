use std::fs;
use std::path::Path;

use serde_json::Value;

fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["fplap"];
    argv.extend_from_slice(args);
    fplap_cli::run(argv)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn eigen_report_has_config_version_and_convention() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e");
    assert_eq!(run(&["eigen", "--s", "0.4", "--p", "2", "--n", "48", "--out", out.to_str().unwrap()]), 0);
    let r = json(&out.join("eigen.json"));
    assert!(r["results"]["lambda1"].as_f64().unwrap() > 0.0);
    assert!(r["results"]["residual"].as_f64().unwrap() < 1e-9);
    assert_eq!(r["config"]["n"], 48);
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert!(r["operator_convention"].as_str().unwrap().contains("w_ij"));
    let plot = fs::read_to_string(out.join("phi1.dat")).unwrap();
    assert_eq!(plot.lines().count(), 48);
    assert!(plot.lines().all(|l| l.split_whitespace().count() == 2));
}

#[test]
fn solve_plus_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = out.to_str().unwrap();
    let args = ["--s", "0.4", "--p", "2", "--q", "0.5", "--alpha", "3", "--lambda", "0.05", "--n", "64"];
    let mut solve = vec!["solve", "--branch", "plus", "--out", o];
    solve.extend_from_slice(&args);
    assert_eq!(run(&solve), 0);
    let r = json(&out.join("report.json"));
    assert!(r["results"]["solution"]["energy"].as_f64().unwrap() < 0.0);
    assert_eq!(r["results"]["verify"]["passed"], true);
    let csv = fs::read_to_string(out.join("solution.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "x,u");
    assert_eq!(csv.lines().count(), 65);

    let input = out.join("solution.csv");
    let vout = dir.path().join("v");
    let mut verify = vec!["verify", "--input", input.to_str().unwrap(), "--out", vout.to_str().unwrap()];
    verify.extend_from_slice(&args);
    assert_eq!(run(&verify), 0);
    // the same function is not a solution at another lambda
    let mut wrong = verify.clone();
    let pos = wrong.iter().position(|a| *a == "0.05").unwrap();
    wrong[pos] = "0.5";
    assert_eq!(run(&wrong), 2);
    // nor on another mesh
    let mut other = verify.clone();
    let pos = other.iter().position(|a| *a == "64").unwrap();
    other[pos] = "32";
    assert_eq!(run(&other), 1);
}

#[test]
fn sweep_finds_transition() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w");
    let code = run(&[
        "sweep", "--n", "48", "--lambda-min", "1", "--lambda-max", "200", "--grid", "8", "--bisection-steps", "6",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let r = json(&out.join("sweep.json"));
    assert_eq!(r["results"]["transition"], true);
    let hat = r["results"]["lambda_hat"].as_f64().unwrap();
    assert!(hat > 1.0 && hat < 200.0);
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "lambda,succeeded,iterations,energy,sup_norm,residual");
    let ok: Vec<bool> = lines.map(|l| l.split(',').nth(1).unwrap() == "true").collect();
    assert_eq!(ok.len(), 8);
    let first_fail = ok.iter().position(|s| !s).unwrap();
    assert!(first_fail > 0 && ok[first_fail..].iter().all(|s| !s));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# test config\nlambda = 0.2\nn = 40   # coarse\n").unwrap();
    let out = dir.path().join("f");
    let code = run(&["fiber", "--config", cfg.to_str().unwrap(), "--lambda", "0.1", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let r = json(&out.join("fiber.json"));
    assert_eq!(r["config"]["lambda"], 0.1);
    assert_eq!(r["config"]["n"], 40);
}

#[test]
fn invalid_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("x");
    let o = o.to_str().unwrap();
    assert_eq!(run(&["eigen", "--s", "0.6", "--p", "2", "--out", o]), 1);
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "s = 0.3\nthis line is wrong\n").unwrap();
    assert_eq!(run(&["eigen", "--config", cfg.to_str().unwrap(), "--out", o]), 1);
    let missing = dir.path().join("missing.cfg");
    assert_eq!(run(&["eigen", "--config", missing.to_str().unwrap(), "--out", o]), 1);
    assert_eq!(run(&["solve", "--branch", "sideways", "--out", o]), 1);
    assert_eq!(run(&["nonsense"]), 1);
}

#[test]
fn solver_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("z");
    // far above the fibering threshold: the ray through phi_1 has no Nehari points
    assert_eq!(run(&["solve", "--n", "40", "--lambda", "1000", "--out", o.to_str().unwrap()]), 2);
}

#[test]
fn pure_singular_branch() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ps");
    assert_eq!(run(&["solve", "--branch", "pure-singular", "--n", "40", "--lambda", "2", "--out", out.to_str().unwrap()]), 0);
    let r = json(&out.join("report.json"));
    assert_eq!(r["config"]["mode"], "pure_singular");
    assert_eq!(r["results"]["verify"]["passed"], true);
}

#[test]
fn reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    let o = out.to_str().unwrap();
    let args = ["solve", "--branch", "minus", "--n", "48", "--lambda", "3", "--seed", "11", "--out", o];
    assert_eq!(run(&args), 0);
    let first = fs::read(out.join("report.json")).unwrap();
    let first_csv = fs::read(out.join("solution.csv")).unwrap();
    assert_eq!(run(&args), 0);
    assert_eq!(first, fs::read(out.join("report.json")).unwrap());
    assert_eq!(first_csv, fs::read(out.join("solution.csv")).unwrap());
}

#[test]
fn kernel_cache_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let out = dir.path().join("k");
    let args = ["eigen", "--n", "32", "--kernel-cache", cache.to_str().unwrap(), "--out", out.to_str().unwrap()];
    assert_eq!(run(&args), 0);
    let first = json(&out.join("eigen.json"))["results"].clone();
    assert_eq!(fs::read_dir(&cache).unwrap().count(), 1);
    assert_eq!(run(&args), 0);
    assert_eq!(first, json(&out.join("eigen.json"))["results"]);
}

#[test]
fn monotone_and_constants_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m");
    let o = out.to_str().unwrap();
    assert_eq!(run(&["monotone", "--n", "48", "--lambda", "3", "--super-lambda", "6", "--out", o]), 0);
    let r = json(&out.join("monotone.json"));
    assert!(r["results"]["max_decrease"].as_f64().unwrap() <= 1e-12);
    assert_eq!(r["results"]["verify"]["passed"], true);
    assert_eq!(run(&["constants", "--n", "48", "--samples", "10", "--out", o]), 0);
    let c = json(&out.join("constants.json"));
    let printed = c["results"]["lambda_star_printed"].as_f64().unwrap();
    let corrected = c["results"]["lambda_star_corrected"].as_f64().unwrap();
    assert!(printed > corrected && corrected > 0.0);
}
