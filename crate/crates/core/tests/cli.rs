//! End-to-end runs of the `gridplan` binary.

use std::path::Path;
use std::process::{Command, Output};

fn gridplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridplan"))
        .args(args)
        .env("GRIDPLAN_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn solve(out: &Path, seed: &str) -> Output {
    gridplan(&[
        "solve",
        "--case",
        "garver6",
        "--config",
        "thesis-ch4",
        "--planner",
        "dc-tnep",
        "--seed",
        seed,
        "--out",
        out.to_str().unwrap(),
    ])
}

#[test]
fn solve_writes_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = solve(&out, "3");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("seed 3"));
    assert!(text.contains("# gridplan"));
    for f in ["summary.txt", "plan.csv", "costs.csv", "trace.csv"] {
        assert!(out.join(f).exists(), "{} missing", f);
    }
}

#[test]
fn same_seed_same_output() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(solve(&a, "9").status.code(), Some(0));
    assert_eq!(solve(&b, "9").status.code(), Some(0));
    for f in ["summary.txt", "plan.csv", "costs.csv", "trace.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{} differs", f);
    }
}

#[test]
fn existing_output_needs_force() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert_eq!(solve(&out, "1").status.code(), Some(0));
    let again = solve(&out, "1");
    assert_eq!(again.status.code(), Some(1));
    assert!(stderr(&again).contains("--force"));
}

#[test]
fn missing_case_names_the_path() {
    let o = gridplan(&["solve", "--case", "/no/such/case.toml", "--planner", "dc-tnep"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/no/such/case.toml"));
}

#[test]
fn unknown_planner_is_a_usage_error() {
    let o = gridplan(&["solve", "--case", "garver6", "--planner", "annealing"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!stderr(&o).is_empty());
}

#[test]
fn bad_flag_is_a_usage_error() {
    assert_eq!(gridplan(&["solve", "--bogus"]).status.code(), Some(1));
}

#[test]
fn evaluate_reference_ac_plan() {
    let o = gridplan(&[
        "evaluate",
        "--case",
        "garver6",
        "--config",
        "thesis-ch4",
        "--planner",
        "ac-tnep",
        "--plan",
        "garver-actnep",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("311,000,000"), "{}", text);
    assert!(text.contains("feasible  yes"));
}

#[test]
fn evaluate_flags_an_infeasible_plan() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("empty.csv");
    std::fs::write(&plan, "stage,item,count\n").unwrap();
    let o = gridplan(&[
        "evaluate",
        "--case",
        "garver6",
        "--config",
        "thesis-ch4",
        "--planner",
        "dc-tnep",
        "--plan",
        plan.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stdout(&o).contains("violation"));
}

#[test]
fn ac_flow_reports_every_bus() {
    let o = gridplan(&["flow", "--case", "garver6", "--config", "thesis-ch4", "--plan", "garver-actnep"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("converged"));
    let buses: Vec<&str> = text.lines().skip_while(|l| !l.starts_with("bus")).skip(1).take(6).collect();
    for (i, row) in buses.iter().enumerate() {
        let v: f64 = row.split_whitespace().nth(1).unwrap().parse().unwrap();
        assert!(row.starts_with(&(i + 1).to_string()) && (0.95..=1.05).contains(&v), "{}", row);
    }
}

#[test]
fn lolp_per_stage() {
    let o = gridplan(&["lolp", "--case", "ieee24", "--config", "thesis-ch2", "--plan", "ieee24-tcgep"]);
    let text = stdout(&o);
    assert!(matches!(o.status.code(), Some(0) | Some(2)), "{}", stderr(&o));
    for t in 1..=3 {
        assert!(text.lines().any(|l| l.starts_with(&t.to_string())), "{}", text);
    }
}

#[test]
fn validate_bundled_inputs() {
    let o = gridplan(&["validate", "--case", "ieee24", "--config", "thesis-ch2", "--plan", "ieee24-gep"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("plan ok"));
}

#[test]
fn reproduce_unknown_suite() {
    let o = gridplan(&["reproduce", "ch9"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("ch2"));
}

#[test]
fn reproduce_quick_suite_prints_a_table() {
    let o = gridplan(&["reproduce", "ch5", "--quick"]);
    assert!(matches!(o.status.code(), Some(0) | Some(2)), "{}", stderr(&o));
    assert!(stdout(&o).contains("PASS"));
}
