//! Drives the `tfhom` binary end to end: exit codes, table shapes, summaries,
//! config files and determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tfhom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tfhom")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json_summary(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = tfhom(&all);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    serde_json::from_str(&stdout(&o)).unwrap()
}

fn metric(v: &Value, key: &str) -> f64 {
    v["metrics"][key].as_f64().unwrap_or_else(|| panic!("metric {key} missing in {v}"))
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn lane_emden_p0_matches_closed_form() {
    let o = tfhom(&["solve", "--p", "0", "--lane-emden", "--xmax", "2", "--tol", "1e-12"]);
    assert_eq!(code(&o), 0);
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, ["x", "y", "yp"]);
    for r in &rows {
        assert!((r[1] - (1.0 + r[0] * r[0] / 6.0)).abs() <= 1e-8);
        assert!((r[2] - r[0] / 3.0).abs() <= 1e-8);
    }
    assert_eq!(rows.last().unwrap()[0], 2.0);
    let summary: Value = serde_json::from_str(&stderr(&o)).unwrap();
    assert_eq!(summary["status"], "ok");
    assert_eq!(summary["metrics"]["termination"], "reached");
}

#[test]
fn solve_reports_zero_crossing_below_critical_slope() {
    let v = json_summary(&["solve", "--slope", "-1.6", "--xmax", "50"]);
    assert_eq!(v["metrics"]["termination"], "crossed_zero");
    assert!(metric(&v, "termination_x") > 1.0);
}

#[test]
fn shoot_summary_has_critical_slope() {
    let v = json_summary(&["shoot"]);
    assert_eq!(v["command"], "shoot");
    assert!((metric(&v, "B") + 1.588071).abs() < 1e-5);
    assert_eq!(v["config"]["tol"], 1e-8);
}

#[test]
fn majorana_then_reconstruct_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("tu.csv");
    let summary = dir.path().join("summary.json");
    let o = tfhom(&["majorana", "--grid", "801", "--output", table.to_str().unwrap(), "--summary", summary.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(o.stdout.is_empty() && o.stderr.is_empty());
    let s: Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert!((metric(&s, "B") + 1.588071).abs() < 1e-5);
    assert!((metric(&s, "boundary_slope_fd") - metric(&s, "boundary_slope")).abs() < 1e-4);
    let (header, rows) = csv_rows(&fs::read_to_string(&table).unwrap());
    assert_eq!(header, ["t", "u"]);
    assert_eq!(rows.len(), 801);

    let o = tfhom(&["reconstruct", "--input", table.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, ["t", "x", "y"]);
    assert_eq!(rows[0], [0.0, 0.0, 1.0]);
    for r in rows.iter().skip(1) {
        assert!((r[1].powi(3) * r[2] / (144.0 * r[0].powi(6)) - 1.0).abs() < 1e-8);
    }
    let s: Value = serde_json::from_str(&stderr(&o)).unwrap();
    assert!(metric(&s, "round_trip_dev") < 1e-4);
}

#[test]
fn reconstruct_input_must_be_a_tu_table() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "x,y\n1,2\n").unwrap();
    let o = tfhom(&["reconstruct", "--input", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).starts_with("error[precondition]:"));
    assert_eq!(stderr(&o).lines().count(), 1);
}

#[test]
fn dresner_route_matches_majorana_route() {
    let v = json_summary(&["reconstruct", "--chart", "dresner", "--grid", "401"]);
    assert!(metric(&v, "dresner_vs_majorana_dev") < 1e-9);
}

#[test]
fn compare_passes_default_bound_and_fails_a_tight_one() {
    let v = json_summary(&["compare", "--xhi", "20"]);
    assert!(metric(&v, "max_rel_err") <= 1e-4);
    let o = tfhom(&["compare", "--xhi", "20", "--bound", "1e-12", "--format", "json"]);
    assert_eq!(code(&o), 4);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["status"], "bound_exceeded");
    assert!(stderr(&o).starts_with("error[bound]:"));
}

#[test]
fn invariance_single_case() {
    let o = tfhom(&["invariance", "--p", "2.5", "--lambda", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,lambda,chart,max_dev"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    for r in rows {
        let cols: Vec<&str> = r.split(',').collect();
        assert!(cols[2] == "coppel" || cols[2] == "milne", "{r}");
        assert!(cols[3].parse::<f64>().unwrap() <= 1e-6);
    }
}

#[test]
fn invariance_is_deterministic_across_execution_modes() {
    let par = tfhom(&["invariance", "--points", "16"]);
    let seq = tfhom(&["invariance", "--points", "16", "--sequential"]);
    let again = tfhom(&["invariance", "--points", "16"]);
    assert_eq!(code(&par), 0);
    assert_eq!(par.stdout, seq.stdout);
    assert_eq!(par.stdout, again.stdout);
}

#[test]
fn p_equal_one_names_q_singularity() {
    let o = tfhom(&["invariance", "--p", "1"]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.starts_with("error[precondition]:") && err.contains("q ="), "{err}");
}

#[test]
fn bad_bracket_is_numerical_failure() {
    let o = tfhom(&["shoot", "--bracket-lo", "-1.5", "--bracket-hi", "-1"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).starts_with("error[numerical]:"));
}

#[test]
fn usage_errors_are_preconditions() {
    for args in [&["frobnicate"][..], &["solve", "--xmax", "abc"], &["majorana", "--grid", "1"], &["shoot", "--tol", "-1"]] {
        let o = tfhom(args);
        assert_eq!(code(&o), 2, "{args:?}");
        let err = stderr(&o);
        assert!(err.starts_with("error[precondition]:") && err.lines().count() == 1, "{args:?}: {err}");
    }
}

#[test]
fn config_file_supplies_flags_and_explicit_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# Lane-Emden, p = 1\np = 1\nlane_emden = true\nxmax = 1\ntol = 1e-12\n").unwrap();
    let v = json_summary(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(v["config"]["form"], "lane_emden");
    assert_eq!(v["metrics"]["x_max"], 1.0);
    let v = json_summary(&["solve", "--config", cfg.to_str().unwrap(), "--xmax", "2"]);
    assert_eq!(v["metrics"]["x_max"], 2.0);
    assert_eq!(v["config"]["p"], 1.0);

    let o = tfhom(&["solve", "--config", dir.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn golden_majorana_head() {
    let o = tfhom(&["majorana", "--grid", "5"]);
    assert_eq!(code(&o), 0);
    let (_, rows) = csv_rows(&stdout(&o));
    let t: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(t, [0.0, 0.25, 0.5, 0.75, 1.0]);
    assert!((rows[0][1] - 2.774615643934).abs() < 1e-9);
    assert_eq!(rows[4][1], 1.0);
    let again = tfhom(&["majorana", "--grid", "5"]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn json_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let o = tfhom(&["shoot", "--tol", "1e-6", "--format", "json", "--output", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(Path::new(&path).exists() && o.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["status"], "ok");
}
