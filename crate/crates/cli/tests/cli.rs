use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fermion-cft")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fermion-cft-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

#[test]
fn verify_car_passes_and_embeds_config() {
    let out = bin(&["verify", "car", "--cutoff", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["passed"], true);
    assert_eq!(r["config"]["cutoff"], "3");
    assert_eq!(r["config"]["target"], "car");
    let checks = r["checks"].as_array().unwrap();
    assert!(!checks.is_empty() && checks.iter().all(|c| c["passed"] == true && c["value"].is_number()));
}

#[test]
fn reports_are_byte_stable() {
    let args = ["verify", "supertrace", "--seed", "42"];
    assert_eq!(bin(&args).stdout, bin(&args).stdout);
    let other = bin(&["verify", "supertrace", "--seed", "43"]);
    assert!(other.status.success());
}

#[test]
fn failed_checks_set_the_exit_code() {
    let out = bin(&["verify", "cauchy", "--grid", "16", "--tolerance", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["passed"], false);
}

#[test]
fn malformed_configs_are_rejected_with_usage() {
    for args in [
        vec!["verify", "car", "--cutoff", "1/3"],
        vec!["verify", "surfaces", "--moduli", "0.2,0.3,0.3"],
        vec!["verify", "surfaces", "--annulus", "1.5"],
        vec!["verify", "cauchy", "--grid", "63"],
        vec!["verify", "cauchy", "--domain", "pants:0.5,0.6,0.1"],
        vec!["verify", "torus"],
        vec!["verify", "car", "--tolerance", "0"],
    ] {
        let out = bin(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"), "{args:?}");
    }
}

#[test]
fn verify_surfaces_with_three_value_moduli() {
    let path = scratch("surfaces.json");
    let out = bin(&["verify", "surfaces", "--cutoff", "1", "--band", "8", "--moduli", "0.5,0.1,0.3162", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let records = r["records"]["surfaces"]["surfaces"].as_array().unwrap();
    assert!(records.iter().any(|s| s["geometry"]["kind"] == "pants"));
}

#[test]
fn verify_cauchy_annulus() {
    let out = bin(&["verify", "cauchy", "--grid", "64", "--domain", "annulus:0.5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let decay = &report(&out)["records"]["cauchy"]["decay"];
    assert_eq!(decay["singular_values"].as_array().unwrap().len(), 30);
}

#[test]
fn nullspace_sweep_writes_csv() {
    let path = scratch("gap.csv");
    let out = bin(&["sweep", "nullspace-gap", "--cutoffs", "1,3/2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["geometry", "cutoff", "unknowns", "smallest", "gap", "distance", "status"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 6);
    for r in rows {
        assert_eq!(&r[6], "ok");
        let gap: f64 = r[4].parse().unwrap();
        assert!(gap >= 1e3);
    }
}

#[test]
fn pants_sweep_flags_invalid_points() {
    let out = bin(&["sweep", "pants-convergence", "--cutoff", "1", "--bands", "4..8", "--ws", "0.3,0.5", "--qs", "0.2"]);
    assert!(out.status.success());
    let r = report(&out);
    let rows = r["rows"].as_array().unwrap();
    assert!(rows[0]["status"].as_str().unwrap().starts_with("skipped"));
    let ok: Vec<&Value> = rows.iter().filter(|x| x["status"] == "ok").collect();
    assert_eq!(ok.len(), 5);
    assert!(ok.iter().all(|x| x["monotone"] == true && x["fitted_rate"].as_f64().unwrap() < 1.0));
}

#[test]
fn ks_sweep_is_stable_across_grids() {
    let out = bin(&["sweep", "ks-decay", "--grids", "64,128", "--domain", "pants:0.5,0.1,0.1"]);
    assert!(out.status.success());
    let rows = report(&out)["rows"].as_array().unwrap().clone();
    let last = |n: u64| rows.iter().filter(|r| r["grid"] == n).last().unwrap()["partial_sum"].as_f64().unwrap();
    assert!((last(64) - last(128)).abs() < 1e-6);
}
