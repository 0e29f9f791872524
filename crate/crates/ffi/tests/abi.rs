use std::ffi::{CStr, CString};
use std::ptr;

use eoflow_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = eo_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn take(p: *mut std::ffi::c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { eo_string_free(p) };
    s
}

struct Handle(*mut EoEngine);

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { eo_engine_free(self.0) };
    }
}

fn delivery() -> Handle {
    let h = Handle(eo_engine_new());
    let status = unsafe { eo_engine_load_corpus(h.0, c("delivery").as_ptr(), c("test").as_ptr()) };
    assert_eq!(status, EoStatus::Ok);
    h
}

fn inject(h: &Handle, individual: &str, property: &str, value: &str) -> EoStatus {
    unsafe {
        eo_engine_inject(
            h.0,
            c("test").as_ptr(),
            c(individual).as_ptr(),
            c(property).as_ptr(),
            c(value).as_ptr(),
        )
    }
}

#[test]
fn load_inject_export_round_trip() {
    let h = delivery();
    assert_eq!(
        inject(&h, "Delivery 1", "objectLoc", r#""Loc B""#),
        EoStatus::Ok
    );
    assert_eq!(
        inject(&h, "Delivery 1", "targetLoc", r#""Loc C""#),
        EoStatus::Ok
    );
    assert_eq!(
        inject(&h, "Delivery 1", "cameObjectLocation", r#""1""#),
        EoStatus::Ok
    );

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { eo_engine_export(h.0, &mut out) }, EoStatus::Ok);
    let log = take(out);
    assert_eq!(log.lines().count() as u64, unsafe {
        eo_engine_event_count(h.0)
    });
    let log_c = c(&log);
    assert_eq!(unsafe { eo_replay_check(log_c.as_ptr()) }, EoStatus::Ok);

    let mut out = ptr::null_mut();
    let status = unsafe { eo_engine_state(h.0, c("Robot 1").as_ptr(), &mut out) };
    assert_eq!(status, EoStatus::Ok);
    let state: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(state["location"]["value"], "Loc B");
}

#[test]
fn gate_failures_map_to_status_codes() {
    let h = delivery();
    let before = unsafe { eo_engine_event_count(h.0) };
    assert_eq!(
        inject(&h, "Delivery 1", "took", r#""1""#),
        EoStatus::ConditionNotMet
    );
    assert!(last_error().contains("took"));
    assert_eq!(
        inject(&h, "Delivery 1", "robot", r#""Robot 1""#),
        EoStatus::ImmutableViolation
    );
    assert_eq!(inject(&h, "Robot 1", "nothing", "1"), EoStatus::UnknownSlot);
    assert_eq!(
        inject(&h, "Robot 1", "location", "{"),
        EoStatus::InvalidJson
    );
    assert_eq!(unsafe { eo_engine_event_count(h.0) }, before);
}

#[test]
fn load_errors() {
    let h = Handle(eo_engine_new());
    let status = unsafe {
        eo_engine_load(
            h.0,
            c("Robot: Individual: R\n: SetModel: Model Nowhere\n").as_ptr(),
            c("test").as_ptr(),
        )
    };
    assert_eq!(status, EoStatus::ValidationError);
    let status = unsafe { eo_engine_load_corpus(h.0, c("elsewhere").as_ptr(), c("test").as_ptr()) };
    assert_eq!(status, EoStatus::NotFound);
    let mut out = ptr::null_mut();
    let status = unsafe { eo_engine_state(h.0, c("Robot 1").as_ptr(), &mut out) };
    assert_eq!(status, EoStatus::NotFound);
    assert!(out.is_null());
}

#[test]
fn null_arguments_are_rejected() {
    let h = delivery();
    let status = unsafe { eo_engine_load(ptr::null_mut(), c("x").as_ptr(), c("a").as_ptr()) };
    assert_eq!(status, EoStatus::NullArgument);
    let status = unsafe { eo_engine_export(h.0, ptr::null_mut()) };
    assert_eq!(status, EoStatus::NullArgument);
    assert_eq!(unsafe { eo_engine_event_count(ptr::null()) }, 0);
    unsafe {
        eo_engine_free(ptr::null_mut());
        eo_string_free(ptr::null_mut());
    }
}

#[test]
fn diverged_replay_reports_seq() {
    let h = delivery();
    let mut out = ptr::null_mut();
    unsafe { eo_engine_export(h.0, &mut out) };
    let log = take(out);
    let tampered: String = log
        .lines()
        .enumerate()
        .filter(|(i, _)| *i != 2)
        .map(|(_, l)| format!("{l}\n"))
        .collect();
    let tampered = c(&tampered);
    assert_eq!(
        unsafe { eo_replay_check(tampered.as_ptr()) },
        EoStatus::ReplayDiverged
    );
    assert!(last_error().contains(r#""seq":3"#), "{}", last_error());
}
