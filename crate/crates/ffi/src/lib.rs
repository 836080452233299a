//! C interface to the spanroute simulator.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `*_free` function. Every fallible call returns an [`SrStatus`];
//! on failure, [`sr_last_error_message`] describes the error for the calling
//! thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use spanroute::run::{self, RunError, RunOptions, RunReport};
use spanroute::scenario::{parse_scenario, Scenario, ScenarioError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    UnknownPolicy = 5,
    MissingField = 6,
    InvalidParam = 7,
    Network = 8,
    Simulation = 9,
    OutOfRange = 10,
    Panic = 11,
}

/// One checkpoint of a policy's aggregated regret curve.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SrCheckpointRow {
    pub t: u64,
    pub mean_cum_regret: f64,
    pub std_cum_regret: f64,
    pub replications: u64,
}

/// A parsed, validated scenario.
pub struct SrScenario {
    inner: Scenario,
}

/// Results of simulating a scenario.
pub struct SrResults {
    report: RunReport,
    names: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: SrStatus, msg: impl Into<String>) -> SrStatus {
    set_error(msg);
    status
}

fn scenario_status(e: &ScenarioError) -> SrStatus {
    match e {
        ScenarioError::Io { .. } => SrStatus::Io,
        ScenarioError::Parse { .. } => SrStatus::Parse,
        ScenarioError::UnknownPolicy { .. } => SrStatus::UnknownPolicy,
        ScenarioError::MissingField(_) => SrStatus::MissingField,
        ScenarioError::InvalidParam { .. } => SrStatus::InvalidParam,
        ScenarioError::Network(_) => SrStatus::Network,
    }
}

fn run_status(e: &RunError) -> SrStatus {
    match e {
        RunError::Io { .. } => SrStatus::Io,
        RunError::Network(_) => SrStatus::Network,
        RunError::InvalidOption { .. } | RunError::Policy { .. } | RunError::Cost(_) => {
            SrStatus::InvalidParam
        }
        _ => SrStatus::Simulation,
    }
}

/// Runs `f`, turning panics into `SrStatus::Panic`.
fn guarded(f: impl FnOnce() -> SrStatus) -> SrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(SrStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, SrStatus> {
    if p.is_null() {
        return Err(fail(SrStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(SrStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

fn options(jobs: u32) -> RunOptions {
    RunOptions {
        jobs: (jobs > 0).then_some(jobs as usize),
        checkpoints: None,
    }
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn sr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn sr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Reads and validates a scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sr_scenario_load(path: *const c_char, out: *mut *mut SrScenario) -> SrStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SrStatus::NullArgument, "out is null");
        }
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match parse_scenario(path) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SrScenario { inner }));
                SrStatus::Ok
            }
            Err(e) => fail(scenario_status(&e), e.to_string()),
        }
    })
}

/// Parses scenario text. `default_output` is the output prefix used when the
/// text has no `output` field.
///
/// # Safety
/// `text` and `default_output` must be NUL-terminated strings and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sr_scenario_parse(
    text: *const c_char,
    default_output: *const c_char,
    out: *mut *mut SrScenario,
) -> SrStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SrStatus::NullArgument, "out is null");
        }
        let (text, prefix) = match (str_arg(text, "text"), str_arg(default_output, "default_output")) {
            (Ok(t), Ok(p)) => (t, p),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match Scenario::parse_str(text, prefix) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SrScenario { inner }));
                SrStatus::Ok
            }
            Err(e) => fail(scenario_status(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `scenario` must come from `sr_scenario_load` or `sr_scenario_parse` and
/// not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sr_scenario_free(scenario: *mut SrScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Resolved configuration text, as printed by `spanroute --validate-only`.
/// Release the string with `sr_string_free`.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sr_scenario_describe(scenario: *const SrScenario, out: *mut *mut c_char) -> SrStatus {
    guarded(|| {
        if scenario.is_null() || out.is_null() {
            return fail(SrStatus::NullArgument, "scenario or out is null");
        }
        match run::validate_only(&(*scenario).inner) {
            Ok(text) => match CString::new(text) {
                Ok(s) => {
                    *out = s.into_raw();
                    SrStatus::Ok
                }
                Err(_) => fail(SrStatus::Simulation, "description contains NUL"),
            },
            Err(e) => fail(run_status(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `s` must come from this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Simulates the scenario in memory. `jobs` = 0 uses all cores.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sr_simulate(scenario: *const SrScenario, jobs: u32, out: *mut *mut SrResults) -> SrStatus {
    guarded(|| {
        if scenario.is_null() || out.is_null() {
            return fail(SrStatus::NullArgument, "scenario or out is null");
        }
        match run::simulate(&(*scenario).inner, &options(jobs)) {
            Ok(report) => {
                let names = report
                    .outcomes
                    .iter()
                    .map(|o| CString::new(o.aggregate.policy.clone()).unwrap_or_default())
                    .collect();
                *out = Box::into_raw(Box::new(SrResults { report, names }));
                SrStatus::Ok
            }
            Err(e) => fail(run_status(&e), e.to_string()),
        }
    })
}

/// Simulates the scenario and writes the CSV files and summary to its output
/// prefix, all or nothing. `jobs` = 0 uses all cores.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_run(scenario: *const SrScenario, jobs: u32) -> SrStatus {
    guarded(|| {
        if scenario.is_null() {
            return fail(SrStatus::NullArgument, "scenario is null");
        }
        match run::run_command(&(*scenario).inner, &options(jobs)) {
            Ok(_) => SrStatus::Ok,
            Err(e) => fail(run_status(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `results` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sr_results_policy_count(results: *const SrResults) -> usize {
    results.as_ref().map_or(0, |r| r.report.outcomes.len())
}

/// Name of policy `index`, owned by the results handle.
///
/// # Safety
/// `results` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sr_results_policy_name(results: *const SrResults, index: usize) -> *const c_char {
    results
        .as_ref()
        .and_then(|r| r.names.get(index))
        .map_or(ptr::null(), |s| s.as_ptr())
}

/// Number of checkpoint rows for policy `index` (0 if out of range).
///
/// # Safety
/// `results` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sr_results_row_count(results: *const SrResults, index: usize) -> usize {
    results
        .as_ref()
        .and_then(|r| r.report.outcomes.get(index))
        .map_or(0, |o| o.aggregate.rows.len())
}

/// # Safety
/// `results` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sr_results_row(
    results: *const SrResults,
    index: usize,
    row: usize,
    out: *mut SrCheckpointRow,
) -> SrStatus {
    guarded(|| {
        let Some(r) = results.as_ref() else {
            return fail(SrStatus::NullArgument, "results is null");
        };
        if out.is_null() {
            return fail(SrStatus::NullArgument, "out is null");
        }
        let Some(cp) = r.report.outcomes.get(index).and_then(|o| o.aggregate.rows.get(row)) else {
            return fail(SrStatus::OutOfRange, format!("no row {row} for policy {index}"));
        };
        *out = SrCheckpointRow {
            t: cp.t,
            mean_cum_regret: cp.mean,
            std_cum_regret: cp.std,
            replications: cp.replications as u64,
        };
        SrStatus::Ok
    })
}

/// Id of the path with the smallest mean cost.
///
/// # Safety
/// `results` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sr_results_best_path(results: *const SrResults, out: *mut usize) -> SrStatus {
    let Some(r) = results.as_ref() else {
        return fail(SrStatus::NullArgument, "results is null");
    };
    if out.is_null() {
        return fail(SrStatus::NullArgument, "out is null");
    }
    *out = r.report.problem.env.optimal();
    SrStatus::Ok
}

/// # Safety
/// `results` must come from `sr_simulate` and not be freed twice. Null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn sr_results_free(results: *mut SrResults) {
    if !results.is_null() {
        drop(Box::from_raw(results));
    }
}
