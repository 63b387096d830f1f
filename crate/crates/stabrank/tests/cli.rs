//! End-to-end tests of the stabrank binary: exit codes, the JSON envelope,
//! byte-level reproducibility, and the file-based workflows.

use serde_json::Value;
use std::process::Command;

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_stabrank"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).expect("utf8 stdout"),
        String::from_utf8(out.stderr).expect("utf8 stderr"),
    )
}

fn run_json(args: &[&str]) -> Value {
    let (code, stdout, stderr) = run(args);
    assert_eq!(code, 0, "args {args:?}: stderr {stderr}");
    let v: Value = serde_json::from_str(&stdout).expect("stdout is JSON");
    assert_eq!(v["schema"], "stabrank.report/1");
    v
}

#[test]
fn rank_exact_reports_two_for_t_squared() {
    let v = run_json(&[
        "rank",
        "exact",
        "--state",
        "T^2",
        "--dict",
        "stab",
        "--mode",
        "exhaustive",
    ]);
    assert_eq!(v["command"], "rank exact");
    assert_eq!(v["result"]["certificate"]["rank"], 2);
    let residual = v["result"]["verified_residual"].as_f64().unwrap();
    assert!(residual <= 1e-9);
}

#[test]
fn bound_main_picks_n_twelve_at_thousand() {
    let v = run_json(&["bound", "main", "--m", "1000", "--delta", "0.5"]);
    assert_eq!(v["result"]["n"], 12);
    let value = v["result"]["report"]["value"].as_f64().unwrap();
    assert!((value - 0.016).abs() < 1e-6, "value {value}");
    assert_eq!(v["result"]["upper_bracket_holds"], true);
    assert_eq!(v["result"]["lower_bracket_holds"], true);
}

#[test]
fn gadget_verify_round_trip_through_circuit_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("circuit.txt");
    let path = path.to_str().unwrap();
    let v = run_json(&[
        "gadget",
        "random",
        "--n",
        "2",
        "--clifford",
        "12",
        "--t",
        "2",
        "--seed",
        "7",
        "--file",
        path,
    ]);
    assert_eq!(v["result"]["t_count"], 2);
    let v = run_json(&["gadget", "verify", "--circuit", path]);
    assert_eq!(v["result"]["passed"], true);
    let v = run_json(&["gadget", "outcomes", "--circuit", path]);
    assert!(v["result"]["max_deviation_from_uniform"].as_f64().unwrap() < 1e-10);
}

#[test]
fn usage_errors_exit_two() {
    let (code, _, _) = run(&["rank", "exact"]);
    assert_eq!(code, 2, "missing required --state");
    let (code, _, _) = run(&["haar", "moment-mc", "--n", "3", "--m-rank", "1", "--t", "2"]);
    assert_eq!(code, 2, "randomized command without --seed");
    let (code, _, stderr) = run(&["rank", "approx", "--state", "T", "--delta", "1.5"]);
    assert_eq!(code, 2, "delta out of range: {stderr}");
    let (code, _, _) = run(&["no-such-family"]);
    assert_eq!(code, 2);
}

#[test]
fn runtime_failures_exit_one() {
    let (code, _, stderr) = run(&["gadget", "verify", "--circuit", "/nonexistent/c.txt"]);
    assert_eq!(code, 1, "stderr {stderr}");
    assert!(stderr.starts_with("error:"));
}

#[test]
fn reports_are_byte_reproducible() {
    for args in [
        vec!["bound", "threshold", "--delta", "0.9"],
        vec![
            "haar",
            "moment-mc",
            "--n",
            "3",
            "--m-rank",
            "1",
            "--t",
            "2",
            "--samples",
            "20000",
            "--seed",
            "5",
        ],
        vec!["demo", "gap", "--seed", "7"],
    ] {
        let (c1, s1, _) = run(&args);
        let (c2, s2, _) = run(&args);
        assert_eq!(c1, 0, "args {args:?}");
        assert_eq!(c1, c2);
        assert_eq!(s1, s2, "rerun differs for {args:?}");
    }
}

#[test]
fn worker_count_never_changes_the_report() {
    let base = [
        "haar",
        "moment-mc",
        "--n",
        "4",
        "--m-rank",
        "3",
        "--t",
        "2",
        "--samples",
        "30000",
        "--seed",
        "12",
    ];
    let mut one = vec!["--workers", "1"];
    one.extend_from_slice(&base);
    let mut seven = vec!["--workers", "7"];
    seven.extend_from_slice(&base);
    let (c1, s1, _) = run(&one);
    let (c7, s7, _) = run(&seven);
    assert_eq!((c1, c7), (0, 0));
    assert_eq!(s1, s7, "thread count leaked into the report");
}

#[test]
fn out_flag_writes_the_same_envelope_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let (code, stdout, _) = run(&["bound", "main", "--m", "1000", "--delta", "0.5"]);
    assert_eq!(code, 0);
    let (code, silent, _) = run(&[
        "--out",
        path.to_str().unwrap(),
        "bound",
        "main",
        "--m",
        "1000",
        "--delta",
        "0.5",
    ]);
    assert_eq!(code, 0);
    assert!(silent.is_empty(), "stdout should be empty with --out");
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, stdout);
}

#[test]
fn sweep_csv_has_header_and_known_minimum() {
    let (code, stdout, _) = run(&["lookup", "sweep", "--n", "10", "--b", "1", "--csv"]);
    assert_eq!(code, 0);
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("lambda,t_count"));
    assert!(stdout.lines().any(|l| l == "32,2016"), "{stdout}");

    let (code, stdout, _) = run(&[
        "bound", "inline", "--delta", "0.5", "--n-min", "10", "--n-max", "12", "--csv",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("n,delta,m_real,exponent,rhs,holds\n"));
    assert_eq!(stdout.lines().count(), 4);
    assert!(stdout.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn table_files_round_trip_through_lookup_build() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.txt");
    let path = path.to_str().unwrap();
    let v = run_json(&[
        "lookup", "random", "--n", "3", "--b", "2", "--seed", "9", "--file", path,
    ]);
    assert_eq!(v["result"]["n"], 3);
    let v = run_json(&[
        "lookup", "build", "--table", path, "--lambda", "2", "--check",
    ]);
    assert_eq!(v["result"]["checked"], true);
    assert_eq!(v["result"]["lambda"], 2);
}

#[test]
fn state_files_round_trip_through_rank() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.txt");
    let path = path.to_str().unwrap();
    run_json(&["stab", "state", "--state", "T^2", "--file", path]);
    let v = run_json(&["rank", "exact", "--state", path]);
    assert_eq!(v["result"]["certificate"]["rank"], 2);
}

#[test]
fn census_matches_closed_forms() {
    let v = run_json(&["stab", "census", "--n", "2"]);
    assert_eq!(v["result"]["count"], 60);
    assert_eq!(v["result"]["matches"], true);
    let v = run_json(&["stab", "census", "--n", "3", "--dict", "quadphase"]);
    assert_eq!(v["result"]["count"], 64);
}
