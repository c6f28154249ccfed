//! End-to-end exercise of the C ABI from Rust: happy paths, error paths,
//! and the generated C header.

use std::ffi::{c_char, CStr, CString};
use std::ptr;

use yoyosim_ffi::*;

/// Copies the thread-local error message, if any.
fn last_error() -> Option<String> {
    let ptr = ys_last_error_message();
    if ptr.is_null() {
        None
    } else {
        Some(unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_string())
    }
}

/// Copies a returned string and releases the C allocation.
fn take_string(ptr: *mut c_char) -> String {
    assert!(!ptr.is_null(), "string out-parameter left null on Ok");
    let text = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_string();
    unsafe { ys_string_free(ptr) };
    text
}

fn builtin_handle(name: &str) -> *mut YsScenario {
    let name = CString::new(name).unwrap();
    let mut scenario: *mut YsScenario = ptr::null_mut();
    let status = unsafe { ys_scenario_builtin(name.as_ptr(), &mut scenario) };
    assert_eq!(status, YsStatus::Ok, "builtin failed: {:?}", last_error());
    assert!(!scenario.is_null());
    scenario
}

/// Two linearly separable classes on the first column.
fn toy_csv() -> CString {
    let mut csv = String::from("x,y,label\n");
    for i in 0..50 {
        csv.push_str(&format!("{i},1,0\n"));
    }
    for i in 0..50 {
        csv.push_str(&format!("{},1,1\n", 100 + i));
    }
    CString::new(csv).unwrap()
}

#[test]
fn version_is_the_package_version() {
    let version = unsafe { CStr::from_ptr(ys_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn builtin_scenario_simulates_and_exposes_its_trace() {
    let scenario = builtin_handle("steady");

    let mut result: *mut YsSimResult = ptr::null_mut();
    let status = unsafe { ys_simulate(scenario, &mut result) };
    assert_eq!(status, YsStatus::Ok, "simulate failed: {:?}", last_error());

    let mut len = 0usize;
    assert_eq!(unsafe { ys_trace_len(result, &mut len) }, YsStatus::Ok);
    assert_eq!(len, 3600, "steady runs for one simulated hour");

    let mut row = YsTraceRow {
        t: u64::MAX,
        offered_rate: -1.0,
        ready_pods: 0,
        total_pods: 0,
        ready_nodes: 0,
        total_nodes: 0,
        avg_relative_cpu: -1.0,
        response_time: -1.0,
        errors: u64::MAX,
    };
    assert_eq!(unsafe { ys_trace_row(result, 0, &mut row) }, YsStatus::Ok);
    assert_eq!(row.t, 0);
    assert_eq!(row.total_pods, 3);
    assert_eq!(row.total_nodes, 4);
    assert!(row.ready_pods <= row.total_pods);
    assert_eq!(row.errors, 0, "a steady workload never overflows");
    assert!(row.offered_rate > 0.0);
    assert!(row.response_time > 0.0);

    assert_eq!(
        unsafe { ys_trace_row(result, len - 1, &mut row) },
        YsStatus::Ok
    );
    assert_eq!(row.t, len as u64 - 1);

    // One past the end is rejected and names the actual length.
    assert_eq!(
        unsafe { ys_trace_row(result, len, &mut row) },
        YsStatus::InvalidInput
    );
    let message = last_error().expect("out-of-range row sets an error message");
    assert!(message.contains("3600"), "unhelpful message: {message}");

    let mut csv: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { ys_trace_csv(result, &mut csv) }, YsStatus::Ok);
    let csv = take_string(csv);
    assert!(csv.starts_with("t,"), "missing header: {}", &csv[..40]);
    assert_eq!(csv.lines().count(), 3601, "header plus one line per tick");

    unsafe {
        ys_sim_result_free(result);
        ys_scenario_free(scenario);
    }
}

#[test]
fn burst_scenario_emits_lifecycle_events() {
    let scenario = builtin_handle("yoyo-k20");
    let mut result: *mut YsSimResult = ptr::null_mut();
    assert_eq!(unsafe { ys_simulate(scenario, &mut result) }, YsStatus::Ok);

    let mut jsonl: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { ys_events_jsonl(result, &mut jsonl) }, YsStatus::Ok);
    let jsonl = take_string(jsonl);
    assert!(!jsonl.is_empty());
    assert!(jsonl.lines().all(|line| line.starts_with('{')));
    assert!(
        jsonl.contains("PodPlaced"),
        "burst pods must show up in the event log"
    );

    unsafe {
        ys_sim_result_free(result);
        ys_scenario_free(scenario);
    }
}

#[test]
fn toml_round_trips_through_parse_and_serialize() {
    let scenario = builtin_handle("yoyo-k20");

    let mut toml: *mut c_char = ptr::null_mut();
    assert_eq!(
        unsafe { ys_scenario_to_toml(scenario, &mut toml) },
        YsStatus::Ok
    );
    let first = take_string(toml);
    assert!(first.contains("yoyo"));

    let text = CString::new(first.clone()).unwrap();
    let mut reparsed: *mut YsScenario = ptr::null_mut();
    assert_eq!(
        unsafe { ys_scenario_from_toml(text.as_ptr(), &mut reparsed) },
        YsStatus::Ok,
        "reparse failed: {:?}",
        last_error()
    );

    let mut toml2: *mut c_char = ptr::null_mut();
    assert_eq!(
        unsafe { ys_scenario_to_toml(reparsed, &mut toml2) },
        YsStatus::Ok
    );
    assert_eq!(take_string(toml2), first, "serialization is a fixed point");

    unsafe {
        ys_scenario_free(reparsed);
        ys_scenario_free(scenario);
    }
}

#[test]
fn damage_assessment_returns_the_report_as_json() {
    let scenario = builtin_handle("packed-yoyo-k20");

    let mut json: *mut c_char = ptr::null_mut();
    let status = unsafe { ys_assess_damage(scenario, &mut json) };
    assert_eq!(status, YsStatus::Ok, "assess failed: {:?}", last_error());
    let json = take_string(json);
    for field in [
        "relative_performance_damage",
        "relative_economic_damage",
        "potency",
        "attack_cost",
    ] {
        assert!(json.contains(field), "report lacks {field}: {json}");
    }

    unsafe { ys_scenario_free(scenario) };
}

#[test]
fn training_prediction_and_json_round_trip() {
    let csv = toy_csv();
    let mut model: *mut YsModel = ptr::null_mut();
    let status = unsafe { ys_model_train_from_csv(csv.as_ptr(), &mut model) };
    assert_eq!(status, YsStatus::Ok, "train failed: {:?}", last_error());

    let mut p = f64::NAN;
    let mut is_attack = false;
    let benign = [5.0, 1.0];
    assert_eq!(
        unsafe { ys_model_predict(model, benign.as_ptr(), benign.len(), &mut p, &mut is_attack) },
        YsStatus::Ok
    );
    assert!(p < 0.5, "benign point scored {p}");
    assert!(!is_attack);

    let hostile = [125.0, 1.0];
    let mut p_hostile = f64::NAN;
    assert_eq!(
        unsafe {
            ys_model_predict(
                model,
                hostile.as_ptr(),
                hostile.len(),
                &mut p_hostile,
                &mut is_attack,
            )
        },
        YsStatus::Ok
    );
    assert!(p_hostile > 0.5, "hostile point scored {p_hostile}");
    assert!(is_attack);

    // A vector of the wrong width is rejected, not misread.
    let short = [1.0];
    assert_eq!(
        unsafe { ys_model_predict(model, short.as_ptr(), short.len(), &mut p, &mut is_attack) },
        YsStatus::InvalidInput
    );
    assert!(last_error().is_some());

    let mut json: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { ys_model_to_json(model, &mut json) }, YsStatus::Ok);
    let dump = take_string(json);

    let text = CString::new(dump.clone()).unwrap();
    let mut restored: *mut YsModel = ptr::null_mut();
    assert_eq!(
        unsafe { ys_model_from_json(text.as_ptr(), &mut restored) },
        YsStatus::Ok,
        "restore failed: {:?}",
        last_error()
    );

    let mut json2: *mut c_char = ptr::null_mut();
    assert_eq!(
        unsafe { ys_model_to_json(restored, &mut json2) },
        YsStatus::Ok
    );
    assert_eq!(take_string(json2), dump, "dump/restore is a fixed point");

    let mut p_restored = f64::NAN;
    assert_eq!(
        unsafe {
            ys_model_predict(
                restored,
                hostile.as_ptr(),
                hostile.len(),
                &mut p_restored,
                &mut is_attack,
            )
        },
        YsStatus::Ok
    );
    assert_eq!(
        p_restored.to_bits(),
        p_hostile.to_bits(),
        "restored model must score identically"
    );

    unsafe {
        ys_model_free(restored);
        ys_model_free(model);
    }
}

#[test]
fn failures_set_the_status_and_message() {
    // Unknown builtin: invalid input, and the message lists what exists.
    let name = CString::new("nope").unwrap();
    let mut scenario: *mut YsScenario = ptr::null_mut();
    assert_eq!(
        unsafe { ys_scenario_builtin(name.as_ptr(), &mut scenario) },
        YsStatus::InvalidInput
    );
    assert!(scenario.is_null(), "out-parameter written on failure");
    let message = last_error().unwrap();
    assert!(message.contains("nope"), "message omits the bad name");
    assert!(message.contains("steady"), "message omits the valid names");

    // Null arguments.
    assert_eq!(
        unsafe { ys_scenario_builtin(ptr::null(), &mut scenario) },
        YsStatus::NullArgument
    );
    assert_eq!(
        unsafe { ys_scenario_builtin(name.as_ptr(), ptr::null_mut()) },
        YsStatus::NullArgument
    );
    let mut result: *mut YsSimResult = ptr::null_mut();
    assert_eq!(
        unsafe { ys_simulate(ptr::null(), &mut result) },
        YsStatus::NullArgument
    );
    let mut len = 0usize;
    assert_eq!(
        unsafe { ys_trace_len(ptr::null(), &mut len) },
        YsStatus::NullArgument
    );

    // Invalid UTF-8 in a string argument.
    let garbage = CString::new(vec![0xffu8, 0xfeu8]).unwrap();
    assert_eq!(
        unsafe { ys_scenario_builtin(garbage.as_ptr(), &mut scenario) },
        YsStatus::InvalidUtf8
    );

    // Malformed scenario and model text.
    let bad_toml = CString::new("cluster = [not toml").unwrap();
    assert_eq!(
        unsafe { ys_scenario_from_toml(bad_toml.as_ptr(), &mut scenario) },
        YsStatus::ParseError
    );
    assert!(last_error().is_some());
    let bad_json = CString::new("{\"trees\": 7").unwrap();
    let mut model: *mut YsModel = ptr::null_mut();
    assert_eq!(
        unsafe { ys_model_from_json(bad_json.as_ptr(), &mut model) },
        YsStatus::ParseError
    );

    // A successful call clears the error slot.
    let good = CString::new("steady").unwrap();
    assert_eq!(
        unsafe { ys_scenario_builtin(good.as_ptr(), &mut scenario) },
        YsStatus::Ok
    );
    assert_eq!(last_error(), None);
    unsafe { ys_scenario_free(scenario) };
}

#[test]
fn frees_accept_null() {
    unsafe {
        ys_scenario_free(ptr::null_mut());
        ys_sim_result_free(ptr::null_mut());
        ys_model_free(ptr::null_mut());
        ys_string_free(ptr::null_mut());
    }
}

#[test]
fn generated_header_covers_the_surface() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/include/yoyosim.h");
    let header = std::fs::read_to_string(path).expect("build script writes the header");

    assert!(header.contains("#ifndef YOYOSIM_H"));
    assert!(header.contains("YS_STATUS_OK = 0"));
    assert!(header.contains("YS_STATUS_PANIC = 7"));
    assert!(header.contains("typedef struct YsTraceRow"));
    for symbol in [
        "ys_version",
        "ys_last_error_message",
        "ys_string_free",
        "ys_scenario_from_toml",
        "ys_scenario_builtin",
        "ys_scenario_to_toml",
        "ys_scenario_free",
        "ys_simulate",
        "ys_sim_result_free",
        "ys_trace_len",
        "ys_trace_row",
        "ys_trace_csv",
        "ys_events_jsonl",
        "ys_assess_damage",
        "ys_model_train_from_csv",
        "ys_model_from_json",
        "ys_model_to_json",
        "ys_model_predict",
        "ys_model_free",
    ] {
        assert!(header.contains(symbol), "header lacks {symbol}");
    }
}
