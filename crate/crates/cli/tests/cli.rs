use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn cryamabe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cryamabe")).args(args).output().expect("binary runs")
}

fn json(output: &Output) -> Value {
    serde_json::from_slice(&output.stdout).expect("stdout is one JSON document")
}

fn without_wall_time(mut report: Value) -> Value {
    report.as_object_mut().unwrap().remove("wall_time_seconds");
    report
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cryamabe-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap_or_else(|| panic!("no check {name}"))
}

#[test]
fn symfun_reports_sigma_of_a_diagonal_matrix() {
    let out = cryamabe(&["symfun", "--matrix", "[[1,0,0],[0,2,0],[0,0,3]]", "--k", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["results"]["sigma_k"], 11.0);
    assert_eq!(report["results"]["sigmas"], serde_json::json!([1.0, 6.0, 11.0, 6.0]));
    assert_eq!(report["config"]["n"], 3);
}

#[test]
fn symfun_accepts_complex_entries_from_a_file() {
    let path = scratch("hermitian.json", "[[2, [0, 1]], [[0, -1], 2]]");
    let out = cryamabe(&["symfun", "--matrix", path.to_str().unwrap(), "--k", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["results"]["sigma_k"], 3.0);
}

#[test]
fn non_hermitian_matrix_file_is_a_validation_error_without_output() {
    let path = scratch("skew.json", "[[1, 2], [3, 1]]");
    let out = cryamabe(&["symfun", "--matrix", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("hermitian"));
    let out = cryamabe(&["symfun", "--matrix", "[[1, 2], [3]"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn inequality_batch_passes_on_gamma_two() {
    let out = cryamabe(&["inequalities", "--n", "4", "--k", "2", "--samples", "100", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert!(check(&report, "min_newton_slack")["value"].as_f64().unwrap() >= -1e-10);
    assert!(check(&report, "min_maclaurin_slack")["value"].as_f64().unwrap() >= -1e-10);
    assert_eq!(report["results"]["inequalities"]["samples"], 100);
    let out = cryamabe(&["inequalities", "--matrix", "[[1]]"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flat_residual_vanishes() {
    let out = cryamabe(&["residual", "--field", "0", "--lambda", "0", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["results"]["summary"]["max_abs_u_form"], 0.0);
    assert_eq!(report["results"]["summary"]["max_abs_v_form"], 0.0);
}

#[test]
fn sphere_residual_with_automatic_constant() {
    let out = cryamabe(&["residual", "--catalog", "v0", "--n", "1", "--k", "1", "--lambda", "auto"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert!(check(&report, "max_abs_u_form_residual")["value"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn sphere_residual_reports_a_positive_ellipticity_minimum() {
    let out = cryamabe(&["residual", "--catalog", "v0", "--n", "2", "--k", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert!(report["results"]["ellipticity"]["min_eigenvalue"].as_f64().unwrap() > 0.0);
}

#[test]
fn wrong_constant_fails_a_check() {
    let out = cryamabe(&["residual", "--catalog", "v0", "--n", "1", "--lambda", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn domain_errors_name_the_failing_point() {
    let out = cryamabe(&["residual", "--field", "log(x1)", "--n", "1", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("at point ["));
}

#[test]
fn residual_csv_has_one_row_per_sample() {
    let out = cryamabe(&["residual", "--n", "1", "--samples", "5", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("sample,coords,sigma_k"));
}

#[test]
fn verify_sphere_meets_its_target() {
    let out = cryamabe(&["verify-sphere", "--n", "1", "--k", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    let constant = check(&report, "sphere_constant");
    assert_eq!(constant["target"], std::f64::consts::PI);
    assert_eq!(constant["tolerance"], 1e-3);
    assert_eq!(report["results"]["convergence"].as_array().unwrap().len(), 2);
}

#[test]
fn verify_sphere_rejects_k_above_n_and_guards_large_n() {
    let out = cryamabe(&["verify-sphere", "--n", "2", "--k", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let out = cryamabe(&["verify-sphere", "--n", "4", "--k", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn variation_on_the_sphere_passes_with_the_consistent_coefficient() {
    let out = cryamabe(&["variation", "--n", "1", "--k", "1", "--directions", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["config"]["coefficient"], "consistent");
    assert!(report["results"]["max_gap_consistent"].as_f64().unwrap() <= 1e-3);
    assert!(check(&report, "criticality_max_abs")["value"].as_f64().unwrap() <= 1e-3);
}

#[test]
fn variation_with_the_stated_coefficient_fails_its_checks() {
    let out = cryamabe(&["variation", "--n", "1", "--k", "1", "--directions", "1", "--coefficient", "stated"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["results"]["max_gap_stated"].as_f64().unwrap() > 1.0);
}

#[test]
fn variation_on_the_flat_base_passes() {
    let out = cryamabe(&["variation", "--field", "0", "--n", "1", "--k", "1", "--directions", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    for v in report["results"]["variations"].as_array().unwrap() {
        assert_eq!(v["predicted_consistent"], 0.0);
    }
}

#[test]
fn strict_variation_on_a_non_admissible_base_is_a_hypothesis_violation() {
    let args = ["variation", "--n", "2", "--field", "0.3*x1*t^2 + y1^3*x2", "--directions", "1", "--grid-level", "0"];
    let out = cryamabe(&[&args[..], &["--strict"]].concat());
    assert_eq!(out.status.code(), Some(5));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("max violation"));
}

#[test]
fn reports_are_deterministic_apart_from_wall_time() {
    for args in [
        vec!["inequalities", "--n", "3", "--k", "2", "--samples", "30", "--seed", "9"],
        vec!["residual", "--catalog", "v0", "--n", "2", "--k", "2", "--seed", "4"],
        vec!["verify-sphere", "--n", "2", "--k", "1", "--workers", "3"],
    ] {
        let a = without_wall_time(json(&cryamabe(&args)));
        let b = without_wall_time(json(&cryamabe(&args)));
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap(), "{args:?}");
    }
    let one = without_wall_time(json(&cryamabe(&["verify-sphere", "--n", "2", "--workers", "1"])));
    let four = without_wall_time(json(&cryamabe(&["verify-sphere", "--n", "2", "--workers", "4"])));
    assert_eq!(one["results"], four["results"]);
}

#[test]
fn flags_override_the_config_file_which_overrides_defaults() {
    let path = scratch("run.toml", "n = 2\nk = 2\nseed = 5\nsamples = 7\ntol = 1e-5\n\n[params]\nradius = 2.0\n");
    let out = cryamabe(&["residual", "--config", path.to_str().unwrap(), "--k", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let cfg = &json(&out)["config"];
    assert_eq!(cfg["n"], 2);
    assert_eq!(cfg["k"], 1);
    assert_eq!(cfg["seed"], 5);
    assert_eq!(cfg["samples"], 7);
    assert_eq!(cfg["tol"], 1e-5);
    assert_eq!(cfg["params"]["radius"], 2.0);
    assert_eq!(cfg["levi_scale"], 2.0);
    assert_eq!(cfg["format"], "json");
}

#[test]
fn bad_config_files_and_flags_are_validation_errors() {
    let path = scratch("bad.toml", "unknown_key = 1\n");
    let out = cryamabe(&["residual", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert_eq!(cryamabe(&["residual", "--config", "/nonexistent/run.toml"]).status.code(), Some(2));
    assert_eq!(cryamabe(&["residual", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(cryamabe(&["residual", "--field", "x1 +", "--n", "1"]).status.code(), Some(2));
    assert_eq!(cryamabe(&["residual", "--field", "x1", "--catalog", "v0"]).status.code(), Some(2));
    assert_eq!(cryamabe(&["residual", "--tol", "-1"]).status.code(), Some(2));
}

#[test]
fn convention_overrides_are_echoed() {
    let out = cryamabe(&["residual", "--n", "2", "--levi-scale", "3", "--frame-sign", "-1", "--samples", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["convention"]["levi_scale"], 3.0);
    assert_eq!(report["convention"]["frame_sign"], -1);
}

#[test]
fn unreachable_quadrature_tolerance_is_an_integration_error() {
    let out = cryamabe(&["verify-sphere", "--n", "1", "--tol", "1e-16", "--grid-level", "0"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("refinement history"));
}
