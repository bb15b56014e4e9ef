use std::path::Path;
use std::process::{Command, Output};

fn fwmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fwmix")).args(args).output().unwrap()
}

fn stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("an error line");
    serde_json::from_str(line).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn simulate_from_config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "kind = \"fock\"\nmean = 12\npoints = 50\nchi_t_max = 0.3\n").unwrap();
    let csv = dir.path().join("out.csv");
    let out = fwmix(&["simulate", "-c", p(&cfg), "--points", "11", "-o", p(&csv), "--format", "both"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.contains("# schema_version = 1"));
    assert!(text.contains("# config: points = 11"));
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body.len(), 12);
    assert!(body[0].starts_with("chi_t,n0,n1,n2,lo_population,mean_x1"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out.json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 11);
}

#[test]
fn identical_runs_are_byte_identical() {
    let args = ["simulate", "--kind", "poissonian", "--mean", "15", "--points", "20"];
    let a = fwmix(&args);
    let b = fwmix(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn invalid_config_names_the_field() {
    let out = fwmix(&["simulate", "--kind", "fock", "--mean", "10", "--points", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert_eq!(err["error"], "config");
    assert_eq!(err["field"], "points");

    let out = fwmix(&["simulate", "--kind", "thermal", "--mean", "5", "--criteria", "nope"]);
    assert_eq!(stderr_json(&out)["field"], "criteria");

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "kind = \"fock\"\nmean = 4\nspeed = 3\n").unwrap();
    let out = fwmix(&["simulate", "-c", p(&cfg)]);
    assert_eq!(stderr_json(&out)["field"], "speed");
}

#[test]
fn resource_limit_is_reported() {
    let out = fwmix(&["simulate", "--kind", "fock", "--mean", "4000", "--memory-budget-bytes", "1000"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "resource");
}

#[test]
fn criteria_verb_recomputes_from_moments() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    assert!(fwmix(&["simulate", "--kind", "fock", "--mean", "9", "--points", "15", "-o", p(&csv)]).status.success());
    let out = fwmix(&["criteria", p(&csv), "--criteria", "epr_reid,separability"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.ends_with("separability_inference,separability_defined"));
    assert!(!header.contains("epr_sum_lhs"));

    let missing = dir.path().join("missing.csv");
    std::fs::write(&missing, "chi_t,var_x1\n0,1\n").unwrap();
    let out = fwmix(&["criteria", p(&missing)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "table");
}

#[test]
fn compare_and_validate() {
    let out = fwmix(&["compare", "--sizes", "10,20", "--points", "5", "--scaled-max", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 11);
    assert!(rows[0].ends_with("pump_duan,pump_reid"));
    assert!(rows[1].starts_with("10,0.0000000000000000e0"));

    let out = fwmix(&["validate", "--max-n", "8"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 6);
    assert_eq!(fwmix(&["validate", "--max-n", "40"]).status.code(), Some(2));
}
