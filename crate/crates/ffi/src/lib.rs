//! C ABI over the `cps_detect` library.
//!
//! Systems live behind opaque `CpsSystem` handles. Results come back as
//! NUL-terminated JSON strings owned by the caller and released with
//! `cps_string_free`. Every call returns a `CpsStatus`; on failure the
//! message is available from `cps_last_error` on the same thread.

use cps_detect::descriptor::{signature, AttackSet, DescriptorSystem, SystemFile};
use cps_detect::detect::{self, SearchOptions};
use cps_detect::error::Error;
use cps_detect::structural::{structurally_left_invertible, StructuredSystem};
use cps_detect::zeros::invariant_zeros;
use serde_json::{json, Value};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CpsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed or inconsistent input data.
    DataError = 3,
    /// The analysis could not reach a verdict (singular pencil, not index one, ...).
    AnalysisError = 4,
    BudgetExceeded = 5,
    Panic = 6,
}

/// Monitor class for `cps_detect`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CpsMonitor {
    Static = 0,
    Dynamic = 1,
    Active = 2,
}

/// Opaque descriptor system.
pub struct CpsSystem {
    inner: DescriptorSystem,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> CpsStatus {
    match e {
        Error::BudgetExceeded(_) => CpsStatus::BudgetExceeded,
        e if e.is_analysis() => CpsStatus::AnalysisError,
        _ => CpsStatus::DataError,
    }
}

enum Failure {
    Status(CpsStatus, String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CpsStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CpsStatus::Ok,
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(json!({ "error": e.kind(), "message": e.to_string() }).to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            CpsStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(CpsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn system_ref<'a>(sys: *const CpsSystem) -> Result<&'a DescriptorSystem, Failure> {
    sys.as_ref().map(|s| &s.inner).ok_or_else(|| null("system"))
}

unsafe fn attack_set(ptr: *const usize, len: usize) -> Result<AttackSet, Failure> {
    if len == 0 {
        return Ok(AttackSet::new(Vec::new())?);
    }
    if ptr.is_null() {
        return Err(null("attack set"));
    }
    Ok(AttackSet::new(std::slice::from_raw_parts(ptr, len).to_vec())?)
}

unsafe fn write_json(out: *mut *mut c_char, v: &Value) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    let s = CString::new(v.to_string()).expect("JSON has no interior NUL");
    *out = s.into_raw();
    Ok(())
}

/// Parses a JSON system file and stores a new handle in `*out`.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cps_system_from_json(json: *const c_char, out: *mut *mut CpsSystem) -> CpsStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| Failure::Status(CpsStatus::InvalidUtf8, "json is not UTF-8".into()))?;
        let file: SystemFile = serde_json::from_str(text).map_err(Error::from)?;
        let inner = file.into_system()?;
        *out = Box::into_raw(Box::new(CpsSystem { inner }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `sys` must come from `cps_system_from_json` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cps_system_free(sys: *mut CpsSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Writes the state and output dimensions.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cps_system_dims(sys: *const CpsSystem, n: *mut usize, p: *mut usize) -> CpsStatus {
    guard(|| {
        let s = system_ref(sys)?;
        if n.is_null() || p.is_null() {
            return Err(null("dimension pointer"));
        }
        *n = s.n();
        *p = s.p();
        Ok(())
    })
}

/// Invariant zeros of the attack signature as a JSON array.
///
/// # Safety
/// `attack` must point to `len` channel indices (1-based); `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cps_zeros(sys: *const CpsSystem, attack: *const usize, len: usize, out: *mut *mut c_char) -> CpsStatus {
    guard(|| {
        let s = system_ref(sys)?;
        let sig = signature(s, &attack_set(attack, len)?)?;
        let zs = invariant_zeros(s, &sig)?;
        write_json(out, &serde_json::to_value(zs).map_err(Error::from)?)
    })
}

/// Detectability verdict as JSON.
///
/// # Safety
/// As for `cps_zeros`.
#[no_mangle]
pub unsafe extern "C" fn cps_detect(
    sys: *const CpsSystem,
    attack: *const usize,
    len: usize,
    monitor: CpsMonitor,
    seed: u64,
    out: *mut *mut c_char,
) -> CpsStatus {
    guard(|| {
        let s = system_ref(sys)?;
        let k = attack_set(attack, len)?;
        let opts = SearchOptions { seed, ..SearchOptions::default() };
        let v = match monitor {
            CpsMonitor::Static => detect::static_undetectable(s, &k)?,
            CpsMonitor::Dynamic => detect::dynamic_undetectable_with(s, &k, &opts)?,
            CpsMonitor::Active => detect::active_undetectable(s, &k)?,
        };
        write_json(out, &v.to_json())
    })
}

/// Dynamic identifiability verdict as JSON. Returns `BudgetExceeded` when
/// more than `budget` alternative sets would have to be examined.
///
/// # Safety
/// As for `cps_zeros`.
#[no_mangle]
pub unsafe extern "C" fn cps_identify(
    sys: *const CpsSystem,
    attack: *const usize,
    len: usize,
    budget: usize,
    seed: u64,
    out: *mut *mut c_char,
) -> CpsStatus {
    guard(|| {
        let s = system_ref(sys)?;
        let k = attack_set(attack, len)?;
        let hit = detect::dynamic_unidentifiable(s, &k, &SearchOptions { budget, seed })?;
        write_json(
            out,
            &json!({
                "unidentifiable": hit.is_some(),
                "r": hit.as_ref().map(|h| h.0.clone()),
                "witness": hit.as_ref().map(|h| serde_json::to_value(&h.1).expect("zero serializes")),
                "monitor_class": "dynamic",
                "budget_exhausted": false,
            }),
        )
    })
}

/// Structural left-invertibility from the numeric sparsity pattern.
///
/// # Safety
/// As for `cps_zeros`.
#[no_mangle]
pub unsafe extern "C" fn cps_structural(sys: *const CpsSystem, attack: *const usize, len: usize, out: *mut *mut c_char) -> CpsStatus {
    guard(|| {
        let s = system_ref(sys)?;
        let sig = signature(s, &attack_set(attack, len)?)?;
        let li = structurally_left_invertible(&StructuredSystem::from_system(s, &sig))?;
        write_json(
            out,
            &json!({
                "max_linking": li.max_linking,
                "left_invertible": li.left_invertible,
                "witness_paths": li.linking.paths,
            }),
        )
    })
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn cps_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cps_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cps_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
