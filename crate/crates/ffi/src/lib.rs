//! C ABI over the autoscaling simulator.
//!
//! Conventions, enforced by every function here:
//! - Return a [`YsStatus`]; write out-parameters only on `Ok`.
//! - Handles are opaque; release each with its paired `*_free` function.
//!   Freeing null is a no-op.
//! - Returned strings are NUL-terminated UTF-8 owned by the caller;
//!   release them with [`ys_string_free`].
//! - On failure, [`ys_last_error_message`] returns a thread-local
//!   description valid until the next call on the same thread.
//! - Panics never unwind across the boundary; they surface as
//!   [`YsStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use yoyosim::damage::evaluate_attack;
use yoyosim::detector::{detection_priority, feature_names, Dataset, GbtModel, GbtParams};
use yoyosim::engine::{run_simulation, SimResult};
use yoyosim::scenario::{builtin, builtin_names, Scenario};
use yoyosim::Error;

/// Result of every C-ABI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YsStatus {
    /// Success; out-parameters are valid.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// An argument or configuration value violates a documented constraint.
    InvalidInput = 3,
    /// A requested ratio or statistic is mathematically undefined.
    Undefined = 4,
    /// Malformed scenario, dataset, or model text.
    ParseError = 5,
    /// A filesystem operation failed.
    IoError = 6,
    /// The implementation panicked; state may be inconsistent.
    Panic = 7,
}

/// A parsed, validated scenario (opaque).
pub struct YsScenario(Scenario);

/// A completed simulation with its trace and event log (opaque).
pub struct YsSimResult(SimResult);

/// A trained boosted-tree classifier (opaque).
pub struct YsModel(GbtModel);

/// One telemetry row, mirrored as plain C data.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YsTraceRow {
    /// Simulated second.
    pub t: u64,
    /// Offered request rate, requests/s.
    pub offered_rate: f64,
    /// Pods serving traffic this tick.
    pub ready_pods: u32,
    /// Live pods (pending + warming + ready).
    pub total_pods: u32,
    /// Nodes in the ready phase.
    pub ready_nodes: u32,
    /// All nodes, the billable count.
    pub total_nodes: u32,
    /// Average relative CPU across live pods, percent.
    pub avg_relative_cpu: f64,
    /// Service response time, milliseconds.
    pub response_time: f64,
    /// Requests failed this tick.
    pub errors: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let text = CString::new(message.replace('\0', "?"))
        .unwrap_or_else(|_| CString::new("error message unavailable").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(error: &Error) -> YsStatus {
    match error {
        Error::InvalidConfig(_)
        | Error::EmptyInput(_)
        | Error::TraceTooShort { .. }
        | Error::DegenerateTrainingSet(_)
        | Error::ArityMismatch { .. } => YsStatus::InvalidInput,
        Error::UndefinedRatio(_) => YsStatus::Undefined,
        Error::Parse(_) => YsStatus::ParseError,
        Error::Io { .. } => YsStatus::IoError,
    }
}

fn fail(error: &Error) -> YsStatus {
    set_error(error.to_string());
    status_of(error)
}

fn fail_null(what: &str) -> YsStatus {
    set_error(format!("{what} must not be null"));
    YsStatus::NullArgument
}

/// Runs `body` with panics converted to [`YsStatus::Panic`] and the error
/// slot cleared on success.
fn guarded(body: impl FnOnce() -> YsStatus) -> YsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => {
            if status == YsStatus::Ok {
                clear_error();
            }
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic with non-string payload".to_string());
            set_error(format!("internal panic: {message}"));
            YsStatus::Panic
        }
    }
}

/// Reads a required C string argument.
///
/// # Safety
/// `ptr` must be null or point to a NUL-terminated string.
unsafe fn read_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, YsStatus> {
    if ptr.is_null() {
        return Err(fail_null(what));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        YsStatus::InvalidUtf8
    })
}

fn give_string(text: String, out: *mut *mut c_char) -> YsStatus {
    match CString::new(text) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            YsStatus::Ok
        }
        Err(_) => {
            set_error("produced text contained an interior NUL byte".to_string());
            YsStatus::Panic
        }
    }
}

/// Library version as a static NUL-terminated string; never freed.
#[no_mangle]
pub extern "C" fn ys_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Description of the most recent failure on this thread, or null if the
/// last call succeeded. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ys_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |s| s.as_ptr())
    })
}

/// Frees a string returned by this library. Null is a no-op.
///
/// # Safety
/// `text` must be a pointer previously returned by this library through a
/// string out-parameter, or null.
#[no_mangle]
pub unsafe extern "C" fn ys_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

/// Parses and validates a TOML scenario.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ys_scenario_from_toml(
    text: *const c_char,
    out: *mut *mut YsScenario,
) -> YsStatus {
    guarded(|| {
        if out.is_null() {
            return fail_null("out");
        }
        let text = match read_str(text, "text") {
            Ok(s) => s,
            Err(status) => return status,
        };
        match Scenario::from_toml_str(text) {
            Ok(scenario) => {
                *out = Box::into_raw(Box::new(YsScenario(scenario)));
                YsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Loads one of the built-in scenarios by name.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ys_scenario_builtin(
    name: *const c_char,
    out: *mut *mut YsScenario,
) -> YsStatus {
    guarded(|| {
        if out.is_null() {
            return fail_null("out");
        }
        let name = match read_str(name, "name") {
            Ok(s) => s,
            Err(status) => return status,
        };
        match builtin(name) {
            Some(scenario) => {
                *out = Box::into_raw(Box::new(YsScenario(scenario)));
                YsStatus::Ok
            }
            None => {
                set_error(format!(
                    "unknown builtin {:?}; available: {}",
                    name,
                    builtin_names().join(", ")
                ));
                YsStatus::InvalidInput
            }
        }
    })
}

/// Serializes a scenario back to TOML.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ys_scenario_to_toml(
    scenario: *const YsScenario,
    out: *mut *mut c_char,
) -> YsStatus {
    guarded(|| {
        if scenario.is_null() {
            return fail_null("scenario");
        }
        if out.is_null() {
            return fail_null("out");
        }
        match (*scenario).0.to_toml_string() {
            Ok(text) => give_string(text, out),
            Err(e) => fail(&e),
        }
    })
}

/// Releases a scenario handle. Null is a no-op.
///
/// # Safety
/// `scenario` must be a handle from this library that has not been freed,
/// or null.
#[no_mangle]
pub unsafe extern "C" fn ys_scenario_free(scenario: *mut YsScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs a scenario to completion at one-second ticks.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ys_simulate(
    scenario: *const YsScenario,
    out: *mut *mut YsSimResult,
) -> YsStatus {
    guarded(|| {
        if scenario.is_null() {
            return fail_null("scenario");
        }
        if out.is_null() {
            return fail_null("out");
        }
        let s = &(*scenario).0;
        match run_simulation(&s.cluster, &s.service, &s.workload, s.duration.secs(), s.seed) {
            Ok(result) => {
                *out = Box::into_raw(Box::new(YsSimResult(result)));
                YsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a simulation result. Null is a no-op.
///
/// # Safety
/// `result` must be a handle from this library that has not been freed,
/// or null.
#[no_mangle]
pub unsafe extern "C" fn ys_sim_result_free(result: *mut YsSimResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Number of telemetry rows in the result's trace.
///
/// # Safety
/// `result` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ys_trace_len(result: *const YsSimResult, out: *mut usize) -> YsStatus {
    guarded(|| {
        if result.is_null() {
            return fail_null("result");
        }
        if out.is_null() {
            return fail_null("out");
        }
        *out = (*result).0.trace.rows.len();
        YsStatus::Ok
    })
}

/// Copies telemetry row `index` into `out`.
///
/// # Safety
/// `result` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ys_trace_row(
    result: *const YsSimResult,
    index: usize,
    out: *mut YsTraceRow,
) -> YsStatus {
    guarded(|| {
        if result.is_null() {
            return fail_null("result");
        }
        if out.is_null() {
            return fail_null("out");
        }
        let rows = &(*result).0.trace.rows;
        let Some(row) = rows.get(index) else {
            set_error(format!(
                "row index {index} out of range for a {}-row trace",
                rows.len()
            ));
            return YsStatus::InvalidInput;
        };
        *out = YsTraceRow {
            t: row.t,
            offered_rate: row.offered_rate,
            ready_pods: row.ready_pods,
            total_pods: row.total_pods,
            ready_nodes: row.ready_nodes,
            total_nodes: row.total_nodes,
            avg_relative_cpu: row.avg_relative_cpu,
            response_time: row.response_time,
            errors: row.errors,
        };
        YsStatus::Ok
    })
}

/// Renders the full trace as CSV.
///
/// # Safety
/// `result` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ys_trace_csv(
    result: *const YsSimResult,
    out: *mut *mut c_char,
) -> YsStatus {
    guarded(|| {
        if result.is_null() {
            return fail_null("result");
        }
        if out.is_null() {
            return fail_null("out");
        }
        match (*result).0.trace.to_csv() {
            Ok(text) => give_string(text, out),
            Err(e) => fail(&e),
        }
    })
}

/// Renders the lifecycle event log as JSON Lines.
///
/// # Safety
/// `result` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ys_events_jsonl(
    result: *const YsSimResult,
    out: *mut *mut c_char,
) -> YsStatus {
    guarded(|| {
        if result.is_null() {
            return fail_null("result");
        }
        if out.is_null() {
            return fail_null("out");
        }
        match (*result).0.events_jsonl() {
            Ok(text) => give_string(text, out),
            Err(e) => fail(&e),
        }
    })
}

/// Runs the scenario together with its steady baseline and unit-power
/// variant, and returns the damage report as a JSON object.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ys_assess_damage(
    scenario: *const YsScenario,
    out: *mut *mut c_char,
) -> YsStatus {
    guarded(|| {
        if scenario.is_null() {
            return fail_null("scenario");
        }
        if out.is_null() {
            return fail_null("out");
        }
        let s = &(*scenario).0;
        let assessment = match evaluate_attack(
            &s.cluster,
            &s.service,
            &s.pricing,
            &s.workload,
            s.duration.secs(),
            s.seed,
        ) {
            Ok(a) => a,
            Err(e) => return fail(&e),
        };
        match assessment.report.to_json() {
            Ok(text) => give_string(text, out),
            Err(e) => fail(&e),
        }
    })
}

/// Trains a boosted-tree classifier on a labeled feature CSV (the format
/// written by the dataset generator: feature columns then a trailing 0/1
/// `label` column). Uses the default hyperparameters; on the canonical
/// telemetry features, exact split-gain ties prefer the scaling series.
///
/// # Safety
/// `csv` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ys_model_train_from_csv(
    csv: *const c_char,
    out: *mut *mut YsModel,
) -> YsStatus {
    guarded(|| {
        if out.is_null() {
            return fail_null("out");
        }
        let text = match read_str(csv, "csv") {
            Ok(s) => s,
            Err(status) => return status,
        };
        let dataset = match Dataset::from_csv(text) {
            Ok(d) => d,
            Err(e) => return fail(&e),
        };
        let feature_priority = if dataset.feature_names == feature_names() {
            Some(detection_priority())
        } else {
            None
        };
        let params = GbtParams {
            feature_priority,
            ..GbtParams::default()
        };
        match GbtModel::train(
            &dataset.features,
            &dataset.labels,
            dataset.feature_names.clone(),
            params,
        ) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(YsModel(model)));
                YsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Restores a model from its JSON dump.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ys_model_from_json(
    json: *const c_char,
    out: *mut *mut YsModel,
) -> YsStatus {
    guarded(|| {
        if out.is_null() {
            return fail_null("out");
        }
        let text = match read_str(json, "json") {
            Ok(s) => s,
            Err(status) => return status,
        };
        match GbtModel::from_json(text) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(YsModel(model)));
                YsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Serializes a model to JSON; the dump restores an identical model.
///
/// # Safety
/// `model` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ys_model_to_json(
    model: *const YsModel,
    out: *mut *mut c_char,
) -> YsStatus {
    guarded(|| {
        if model.is_null() {
            return fail_null("model");
        }
        if out.is_null() {
            return fail_null("out");
        }
        match (*model).0.to_json() {
            Ok(text) => give_string(text, out),
            Err(e) => fail(&e),
        }
    })
}

/// Classifies one feature vector: attack probability and hard label at the
/// 0.5 threshold.
///
/// # Safety
/// `model` must be a live handle; `features` must point to `len` doubles;
/// `out_probability` and `out_is_attack` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ys_model_predict(
    model: *const YsModel,
    features: *const f64,
    len: usize,
    out_probability: *mut f64,
    out_is_attack: *mut bool,
) -> YsStatus {
    guarded(|| {
        if model.is_null() {
            return fail_null("model");
        }
        if features.is_null() {
            return fail_null("features");
        }
        if out_probability.is_null() || out_is_attack.is_null() {
            return fail_null("out_probability/out_is_attack");
        }
        let x = std::slice::from_raw_parts(features, len);
        match (*model).0.predict_proba(x) {
            Ok(p) => {
                *out_probability = p;
                *out_is_attack = p >= 0.5;
                YsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a model handle. Null is a no-op.
///
/// # Safety
/// `model` must be a handle from this library that has not been freed,
/// or null.
#[no_mangle]
pub unsafe extern "C" fn ys_model_free(model: *mut YsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
