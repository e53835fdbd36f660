use cps_detect_ffi::*;
use serde_json::Value;
use std::ffi::{CStr, CString};
use std::ptr;

const SYSTEM: &str = r#"{"n":2,"p":1,"E":[[1,0],[0,0]],"A":[[-1,1],[1,-2]],"C":[[1,0]]}"#;

fn load(json: &str) -> (CpsStatus, *mut CpsSystem) {
    let c = CString::new(json).unwrap();
    let mut sys = ptr::null_mut();
    let st = unsafe { cps_system_from_json(c.as_ptr(), &mut sys) };
    (st, sys)
}

fn take(s: *mut std::ffi::c_char) -> Value {
    let v = serde_json::from_str(unsafe { CStr::from_ptr(s) }.to_str().unwrap()).unwrap();
    unsafe { cps_string_free(s) };
    v
}

fn last_error() -> String {
    let p = cps_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn load_query_free() {
    let (st, sys) = load(SYSTEM);
    assert_eq!(st, CpsStatus::Ok);
    let (mut n, mut p) = (0usize, 0usize);
    assert_eq!(unsafe { cps_system_dims(sys, &mut n, &mut p) }, CpsStatus::Ok);
    assert_eq!((n, p), (2, 1));
    assert!(cps_last_error().is_null());
    unsafe { cps_system_free(sys) };
}

#[test]
fn detect_returns_verdict_json() {
    let (_, sys) = load(SYSTEM);
    let k = [1usize, 3];
    let mut out = ptr::null_mut();
    let st = unsafe { cps_detect(sys, k.as_ptr(), k.len(), CpsMonitor::Dynamic, 7, &mut out) };
    assert_eq!(st, CpsStatus::Ok);
    let v = take(out);
    assert_eq!(v["undetectable"], true);
    assert_eq!(v["monitor_class"], "dynamic");

    let k = [2usize];
    let st = unsafe { cps_detect(sys, k.as_ptr(), k.len(), CpsMonitor::Static, 7, &mut out) };
    assert_eq!(st, CpsStatus::Ok);
    assert_eq!(take(out)["undetectable"], true);
    unsafe { cps_system_free(sys) };
}

#[test]
fn zeros_and_structural() {
    let (_, sys) = load(SYSTEM);
    let k = [2usize];
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { cps_zeros(sys, k.as_ptr(), 1, &mut out) }, CpsStatus::Ok);
    assert!(take(out).is_array());
    assert_eq!(unsafe { cps_structural(sys, k.as_ptr(), 1, &mut out) }, CpsStatus::Ok);
    let v = take(out);
    assert_eq!(v["max_linking"], 1);
    assert_eq!(v["left_invertible"], true);
    unsafe { cps_system_free(sys) };
}

#[test]
fn identify_reports_budget() {
    let (_, sys) = load(SYSTEM);
    let k = [1usize];
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { cps_identify(sys, k.as_ptr(), 1, 1000, 1, &mut out) }, CpsStatus::Ok);
    assert!(take(out)["unidentifiable"].is_boolean());
    assert_eq!(unsafe { cps_identify(sys, k.as_ptr(), 1, 0, 1, &mut out) }, CpsStatus::BudgetExceeded);
    assert!(last_error().contains("BudgetExceeded"));
    unsafe { cps_system_free(sys) };
}

#[test]
fn error_codes() {
    let (st, sys) = load("{not json");
    assert_eq!(st, CpsStatus::DataError);
    assert!(sys.is_null());
    assert!(last_error().contains("Json"));

    let (st, _) = load(r#"{"n":2,"p":1,"E":[[1,0]],"A":[[-1,1],[1,-2]],"C":[[1,0]]}"#);
    assert_eq!(st, CpsStatus::DataError);
    assert!(last_error().contains("DimensionMismatch"));

    let (_, sys) = load(SYSTEM);
    let k = [9usize];
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { cps_zeros(sys, k.as_ptr(), 1, &mut out) }, CpsStatus::DataError);
    assert!(last_error().contains("IndexOutOfRange"));
    let k = [1usize, 2];
    assert_eq!(unsafe { cps_zeros(sys, k.as_ptr(), 2, &mut out) }, CpsStatus::AnalysisError);
    assert!(last_error().contains("NotLeftInvertible"));
    assert_eq!(unsafe { cps_zeros(sys, ptr::null(), 1, &mut out) }, CpsStatus::NullPointer);
    assert_eq!(unsafe { cps_zeros(ptr::null(), k.as_ptr(), 1, &mut out) }, CpsStatus::NullPointer);
    assert_eq!(unsafe { cps_system_from_json(ptr::null(), ptr::null_mut()) }, CpsStatus::NullPointer);
    unsafe { cps_system_free(sys) };
    unsafe { cps_system_free(ptr::null_mut()) };
    unsafe { cps_string_free(ptr::null_mut()) };
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(cps_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/cps_detect.h")).unwrap();
    for f in [
        "cps_system_from_json",
        "cps_system_free",
        "cps_system_dims",
        "cps_zeros",
        "cps_detect",
        "cps_identify",
        "cps_structural",
        "cps_last_error",
        "cps_string_free",
        "cps_version",
        "typedef struct CpsSystem CpsSystem",
        "CPS_STATUS_BUDGET_EXCEEDED",
    ] {
        assert!(header.contains(f), "{f} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = tempdir();
    let src = dir.join("probe.c");
    std::fs::write(&src, "#include \"cps_detect.h\"\nint main(void) { CpsSystem *s = 0; cps_system_free(s); return CPS_STATUS_OK; }\n").unwrap();
    let status = std::process::Command::new(cc)
        .args(["-fsyntax-only", "-Wall", "-Werror", "-I", concat!(env!("CARGO_MANIFEST_DIR"), "/include")])
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc);
        }
    }
    Err(())
}

fn tempdir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("cps_detect_ffi_{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
