use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use sepdiag_ffi::*;

const CONFIG: &str = r#"{
  "dims": {"n": 1, "m": 1},
  "sets": {"C": {"shape": "box", "lower": [0], "upper": ["inf"], "window": 2},
           "Q": {"shape": "box", "lower": [0], "upper": ["inf"], "window": 2}},
  "exprs": {"f": "p^2 - x^2", "g": "q - y"},
  "operator": {"matrix": [[1]]},
  "grids": {"h_out": 0.0625, "h_in": 0.0009765625},
  "schedule": [0.5, 0.25, 0.1, 0.05]
}"#;

fn last_error() -> String {
    let p = sep_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn problem() -> *mut SepProblem {
    let json = CString::new(CONFIG).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { sep_problem_from_json(json.as_ptr(), &mut out) }, SepStatus::Ok);
    assert!(!out.is_null());
    out
}

unsafe fn take_string(s: *mut c_char) -> String {
    let text = CStr::from_ptr(s).to_string_lossy().into_owned();
    sep_string_free(s);
    text
}

#[test]
fn problem_lifecycle_and_residual() {
    let p = problem();
    let (mut n, mut m) = (0, 0);
    unsafe {
        assert_eq!(sep_problem_dims(p, &mut n, &mut m), SepStatus::Ok);
        assert_eq!((n, m), (1, 1));
        let mut r = f64::NAN;
        assert_eq!(sep_eps_residual(p, [0.0].as_ptr(), 1, [0.0].as_ptr(), 1, &mut r), SepStatus::Ok);
        assert_eq!(r, 0.0);
        // f(0.5, ·) has infimum -0.25 and |y - x| = 0.5
        assert_eq!(sep_eps_residual(p, [0.5].as_ptr(), 1, [1.0].as_ptr(), 1, &mut r), SepStatus::Ok);
        assert_eq!(r, 1.0);
        assert_eq!(sep_eps_residual(p, [0.5].as_ptr(), 2, [1.0, 0.0].as_ptr(), 2, &mut r), SepStatus::ComputationError);
        assert_eq!(sep_eps_residual(p, ptr::null(), 1, [1.0].as_ptr(), 1, &mut r), SepStatus::NullPointer);
        sep_problem_free(p);
        sep_problem_free(ptr::null_mut());
    }
}

#[test]
fn cloud_round_trip() {
    let p = problem();
    unsafe {
        let mut cloud = ptr::null_mut();
        assert_eq!(sep_approx_solution_set(p, 0.05, &mut cloud), SepStatus::Ok);
        let (len, dim) = (sep_cloud_len(cloud), sep_cloud_dim(cloud));
        assert_eq!(dim, 2);
        assert!(len > 0);
        assert_eq!(sep_cloud_epsilon(cloud), 0.05);
        let mut buf = vec![f64::NAN; len * dim];
        assert_eq!(sep_cloud_points(cloud, buf.as_mut_ptr(), buf.len() - 1), SepStatus::BufferTooSmall);
        assert!(last_error().contains("needed"));
        assert_eq!(sep_cloud_points(cloud, buf.as_mut_ptr(), buf.len()), SepStatus::Ok);
        assert!(buf.iter().all(|v| (0.0..=0.25).contains(v)));
        sep_cloud_free(cloud);

        let mut cloud = ptr::null_mut();
        assert_eq!(sep_approx_solution_set(p, -1.0, &mut cloud), SepStatus::InvalidArgument);
        assert!(cloud.is_null());
        assert_eq!(sep_cloud_len(ptr::null()), 0);
        sep_problem_free(p);
    }
}

#[test]
fn diagnose_and_check_return_json() {
    let p = problem();
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(sep_diagnose_json(p, &mut out), SepStatus::Ok);
        let report: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(report["schema_version"], "1");
        assert_eq!(report["levels"].as_array().unwrap().len(), 4);

        let all = CString::new("all").unwrap();
        assert_eq!(sep_check_json(p, all.as_ptr(), &mut out), SepStatus::Ok);
        let reports: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(reports.as_array().unwrap().len(), 12);

        let bogus = CString::new("bogus").unwrap();
        assert_eq!(sep_check_json(p, bogus.as_ptr(), &mut out), SepStatus::InvalidArgument);
        assert!(out.is_null());
        assert!(last_error().contains("bogus"));
        sep_problem_free(p);
    }
}

#[test]
fn config_errors_are_reported() {
    let mut out = ptr::null_mut();
    let bad = CString::new(r#"{"dims": {"n": 1, "m": 1}, "bogus": 1}"#).unwrap();
    assert_eq!(unsafe { sep_problem_from_json(bad.as_ptr(), &mut out) }, SepStatus::ConfigError);
    assert!(out.is_null());
    assert!(last_error().contains("bogus"));

    let name = CString::new("builtin:example2").unwrap();
    assert_eq!(unsafe { sep_problem_builtin(name.as_ptr(), &mut out) }, SepStatus::Ok);
    unsafe { sep_problem_free(out) };
    let name = CString::new("builtin:example7").unwrap();
    assert_eq!(unsafe { sep_problem_builtin(name.as_ptr(), &mut out) }, SepStatus::ConfigError);
    assert_eq!(unsafe { sep_problem_builtin(ptr::null(), &mut out) }, SepStatus::NullPointer);
    assert_eq!(unsafe { sep_problem_builtin(name.as_ptr(), ptr::null_mut()) }, SepStatus::NullPointer);

    let invalid = [0xffu8, 0];
    assert_eq!(unsafe { sep_problem_from_json(invalid.as_ptr().cast(), &mut out) }, SepStatus::InvalidUtf8);
}

#[test]
fn budget_errors_have_their_own_status() {
    let config = CONFIG.replace("\"h_out\": 0.0625", "\"h_out\": 1e-9");
    let json = CString::new(config).unwrap();
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(sep_problem_from_json(json.as_ptr(), &mut p), SepStatus::Ok);
        let mut cloud = ptr::null_mut();
        assert_eq!(sep_approx_solution_set(p, 0.1, &mut cloud), SepStatus::BudgetExceeded);
        sep_problem_free(p);
    }
}

#[test]
fn header_is_generated_and_usable_from_c() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(crate_dir.join("include/sepdiag.h")).unwrap();
    for symbol in ["sep_problem_from_json", "sep_cloud_points", "sep_last_error_message", "SEP_STATUS_BUDGET_EXCEEDED"]
    {
        assert!(header.contains(symbol), "{symbol} missing from header");
    }

    // target/<profile>/deps/<test binary> -> target/<profile>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libsepdiag_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping C build: no cc or no {}", lib.display());
        return;
    }
    let exe = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("sepdiag_smoke");
    let build = Command::new("cc")
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}: {}", run.status.code(), String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
