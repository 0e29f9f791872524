//! C ABI over the eoflow engine.
//!
//! Handles are opaque. Every fallible call returns an `EoStatus`; on failure
//! `eo_last_error` describes the most recent error on the calling thread.
//! Strings handed out by the library are owned by the caller and released
//! with `eo_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use eoflow::engine::{Engine, InjectError, LoadError};
use eoflow::expr::Value;
use eoflow::harness::replay_check;
use eoflow::server::WireValue;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EoStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidJson = 3,
    NotFound = 4,
    ParseError = 5,
    ValidationError = 6,
    UnknownSlot = 7,
    InvalidValue = 8,
    ImmutableViolation = 9,
    ConditionNotMet = 10,
    ValueConditionViolation = 11,
    CascadeBudgetExceeded = 12,
    ReplayDiverged = 13,
    Panic = 14,
}

/// Opaque engine handle.
pub struct EoEngine {
    inner: Engine,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

struct Fail(EoStatus, String);

impl From<InjectError> for Fail {
    fn from(e: InjectError) -> Self {
        let status = match e {
            InjectError::UnknownSlot { .. } => EoStatus::UnknownSlot,
            InjectError::InvalidValue { .. } => EoStatus::InvalidValue,
            InjectError::ImmutableViolation { .. } => EoStatus::ImmutableViolation,
            InjectError::ConditionNotMet { .. } => EoStatus::ConditionNotMet,
            InjectError::ValueConditionViolation { .. } => EoStatus::ValueConditionViolation,
            InjectError::CascadeBudgetExceeded { .. } => EoStatus::CascadeBudgetExceeded,
        };
        Fail(status, e.to_string())
    }
}

impl From<LoadError> for Fail {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Parse(p) => Fail(EoStatus::ParseError, p.to_string()),
            LoadError::Validation(v) => Fail(EoStatus::ValidationError, v.to_string()),
            LoadError::Rejected(i) => i.into(),
            LoadError::Cascade(c) => Fail(EoStatus::CascadeBudgetExceeded, c.to_string()),
        }
    }
}

/// Runs `f`, records any failure and turns panics into `EoStatus::Panic`.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> EoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EoStatus::Ok,
        Ok(Err(Fail(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            EoStatus::Panic
        }
    }
}

/// # Safety
/// `s` is null or a NUL-terminated string valid for the call.
unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(Fail(EoStatus::NullArgument, format!("`{what}` is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Fail(EoStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

/// # Safety
/// `engine` is null or a live handle from `eo_engine_new`.
unsafe fn handle<'a>(engine: *mut EoEngine) -> Result<&'a mut Engine, Fail> {
    engine
        .as_mut()
        .map(|e| &mut e.inner)
        .ok_or_else(|| Fail(EoStatus::NullArgument, "`engine` is null".into()))
}

/// # Safety
/// `out` is null or valid for one pointer write.
unsafe fn hand_out(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(EoStatus::NullArgument, "`out` is null".into()));
    }
    let c = CString::new(s).map_err(|_| Fail(EoStatus::InvalidUtf8, "interior NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

/// Creates an engine with an empty graph. Free with `eo_engine_free`.
#[no_mangle]
pub extern "C" fn eo_engine_new() -> *mut EoEngine {
    Box::into_raw(Box::new(EoEngine {
        inner: Engine::new(),
    }))
}

/// # Safety
/// `engine` is null or a handle from `eo_engine_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eo_engine_free(engine: *mut EoEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Parses, validates and loads a BSL block.
///
/// # Safety
/// `engine` is a live handle; `source` and `actor` are NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn eo_engine_load(
    engine: *mut EoEngine,
    source: *const c_char,
    actor: *const c_char,
) -> EoStatus {
    guard(|| {
        let engine = handle(engine)?;
        engine.load_source(text(source, "source")?, text(actor, "actor")?)?;
        Ok(())
    })
}

/// Loads a bundled corpus block by name (`delivery`, `recharging`, `docking`).
///
/// # Safety
/// `engine` is a live handle; `name` and `actor` are NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn eo_engine_load_corpus(
    engine: *mut EoEngine,
    name: *const c_char,
    actor: *const c_char,
) -> EoStatus {
    guard(|| {
        let engine = handle(engine)?;
        let name = text(name, "name")?;
        let source = eoflow::corpus::block(name)
            .ok_or_else(|| Fail(EoStatus::NotFound, format!("no corpus block `{name}`")))?;
        engine.load_source(source, text(actor, "actor")?)?;
        Ok(())
    })
}

/// Writes a value and runs the cascade. `value_json` is a JSON scalar or a
/// tagged value such as `{"type":"ref","value":"Loc A"}`.
///
/// # Safety
/// `engine` is a live handle; the strings are NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn eo_engine_inject(
    engine: *mut EoEngine,
    actor: *const c_char,
    individual: *const c_char,
    property: *const c_char,
    value_json: *const c_char,
) -> EoStatus {
    guard(|| {
        let engine = handle(engine)?;
        let wire: WireValue = serde_json::from_str(text(value_json, "value_json")?)
            .map_err(|e| Fail(EoStatus::InvalidJson, e.to_string()))?;
        engine.inject(
            text(actor, "actor")?,
            text(individual, "individual")?,
            text(property, "property")?,
            Value::from(wire),
        )?;
        Ok(())
    })
}

/// Number of events in the log.
///
/// # Safety
/// `engine` is null or a live handle. Null yields 0.
#[no_mangle]
pub unsafe extern "C" fn eo_engine_event_count(engine: *const EoEngine) -> u64 {
    engine.as_ref().map_or(0, |e| e.inner.graph().last_seq())
}

/// Exports the log as JSON Lines into `*out`.
///
/// # Safety
/// `engine` is a live handle; `out` is valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn eo_engine_export(
    engine: *mut EoEngine,
    out: *mut *mut c_char,
) -> EoStatus {
    guard(|| {
        let log = handle(engine)?.export_log();
        hand_out(out, log)
    })
}

/// Projected properties of one individual as a JSON object into `*out`.
///
/// # Safety
/// `engine` is a live handle; `individual` is NUL-terminated; `out` is
/// valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn eo_engine_state(
    engine: *mut EoEngine,
    individual: *const c_char,
    out: *mut *mut c_char,
) -> EoStatus {
    guard(|| {
        let engine = handle(engine)?;
        let id = text(individual, "individual")?;
        let props = engine
            .state()
            .properties(id)
            .filter(|_| engine.state().individual(id).is_some())
            .ok_or_else(|| Fail(EoStatus::NotFound, format!("no individual `{id}`")))?;
        let json = serde_json::to_string(props).expect("values serialize");
        hand_out(out, json)
    })
}

/// Rebuilds a log from its external events and compares byte for byte.
/// Returns `ReplayDiverged` with the first differing seq in the error text.
///
/// # Safety
/// `log` is NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn eo_replay_check(log: *const c_char) -> EoStatus {
    guard(|| {
        let outcome = replay_check(text(log, "log")?);
        if outcome.passed() {
            Ok(())
        } else {
            let detail = serde_json::to_string(&outcome).expect("outcome serializes");
            Err(Fail(EoStatus::ReplayDiverged, detail))
        }
    })
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn eo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned through an `out` parameter.
///
/// # Safety
/// `s` is null or a pointer from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eo_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
