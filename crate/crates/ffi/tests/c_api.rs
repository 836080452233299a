use std::ffi::{CStr, CString};
use std::ptr;

use spanroute_ffi::*;

const SCENARIO: &str = "\
vertices: s a b r
source: s
destination: r
edges:
  - id: 0, tail: s, head: a, dist: bernoulli 0.2 1
  - id: 1, tail: a, head: r, dist: bernoulli 0.2 1
  - id: 2, tail: s, head: b, dist: bernoulli 0.6 1
  - id: 3, tail: b, head: r, dist: bernoulli 0.6 1
horizon: 200
seeds: base 1 count 3
policy: dsee-star
policy_params:
  w: 0.5
policy: oracle
";

fn parse(text: &str, prefix: &str) -> (SrStatus, *mut SrScenario) {
    let text = CString::new(text).unwrap();
    let prefix = CString::new(prefix).unwrap();
    let mut handle = ptr::null_mut();
    let status = unsafe { sr_scenario_parse(text.as_ptr(), prefix.as_ptr(), &mut handle) };
    (status, handle)
}

fn last_error() -> String {
    let p = sr_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn simulate_and_read_rows() {
    let (status, scenario) = parse(SCENARIO, "unused");
    assert_eq!(status, SrStatus::Ok);
    let mut results = ptr::null_mut();
    unsafe {
        assert_eq!(sr_simulate(scenario, 1, &mut results), SrStatus::Ok);
        assert_eq!(sr_results_policy_count(results), 2);
        let name = CStr::from_ptr(sr_results_policy_name(results, 1));
        assert_eq!(name.to_str().unwrap(), "oracle");
        let rows = sr_results_row_count(results, 0);
        assert!(rows > 2);
        let mut row = SrCheckpointRow::default();
        assert_eq!(sr_results_row(results, 0, rows - 1, &mut row), SrStatus::Ok);
        assert_eq!(row.t, 200);
        assert_eq!(row.replications, 3);
        assert!(row.mean_cum_regret > 0.0);
        assert_eq!(sr_results_row(results, 1, rows - 1, &mut row), SrStatus::Ok);
        assert_eq!(row.mean_cum_regret, 0.0);
        assert_eq!(sr_results_row(results, 5, 0, &mut row), SrStatus::OutOfRange);
        let mut best = 99usize;
        assert_eq!(sr_results_best_path(results, &mut best), SrStatus::Ok);
        assert_eq!(best, 0);
        sr_results_free(results);
        sr_scenario_free(scenario);
    }
}

#[test]
fn errors_map_to_codes() {
    let (status, handle) = parse(&SCENARIO.replace("policy: oracle", "policy: nope"), "x");
    assert_eq!(status, SrStatus::UnknownPolicy);
    assert!(handle.is_null());
    assert!(last_error().contains("nope"));

    let (status, _) = parse(&SCENARIO.replace("bernoulli 0.6 1", "pareto 0.9 1"), "x");
    assert_eq!(status, SrStatus::InvalidParam);

    let (status, _) = parse(&SCENARIO.replace("  w: 0.5\n", ""), "x");
    assert_eq!(status, SrStatus::MissingField);

    let mut handle = ptr::null_mut();
    let status = unsafe { sr_scenario_parse(ptr::null(), ptr::null(), &mut handle) };
    assert_eq!(status, SrStatus::NullArgument);

    let missing = CString::new("/nonexistent/file.scn").unwrap();
    let status = unsafe { sr_scenario_load(missing.as_ptr(), &mut handle) };
    assert_eq!(status, SrStatus::Io);
}

#[test]
fn run_writes_files_and_describe_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("ffi").display().to_string();
    let (status, scenario) = parse(SCENARIO, &prefix);
    assert_eq!(status, SrStatus::Ok);
    unsafe {
        assert_eq!(sr_run(scenario, 0), SrStatus::Ok);
        let mut text = ptr::null_mut();
        assert_eq!(sr_scenario_describe(scenario, &mut text), SrStatus::Ok);
        let described = CStr::from_ptr(text).to_str().unwrap().to_owned();
        sr_string_free(text);
        let (status, again) = parse(&described, "other");
        assert_eq!(status, SrStatus::Ok);
        sr_scenario_free(again);
        sr_scenario_free(scenario);
    }
    for name in ["ffi_dsee-star.csv", "ffi_oracle.csv", "ffi_summary.txt"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(sr_version()) };
    assert!(!v.to_str().unwrap().is_empty());
}
