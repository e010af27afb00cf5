use std::ffi::{CStr, CString};
use std::ptr;

use fdisac_ffi::*;

fn last_error() -> String {
    let p = fdisac_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn scenario(json: &str) -> Result<*mut FdisacScenario, (FdisacStatus, String)> {
    let text = CString::new(json).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { fdisac_scenario_from_json(text.as_ptr(), &mut out) };
    if status == FdisacStatus::Ok {
        Ok(out)
    } else {
        assert!(out.is_null());
        Err((status, last_error()))
    }
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(fdisac_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn null_arguments_are_reported() {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { fdisac_scenario_from_json(ptr::null(), &mut out) }, FdisacStatus::NullPointer);
    assert_eq!(unsafe { fdisac_scenario_default(0, ptr::null_mut()) }, FdisacStatus::NullPointer);
    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { fdisac_solve(ptr::null(), &mut sol) }, FdisacStatus::NullPointer);
    let mut p = 0.0;
    assert_eq!(unsafe { fdisac_solution_total_power_mw(ptr::null(), &mut p) }, FdisacStatus::NullPointer);
    assert_eq!(
        unsafe { fdisac_solution_sinrs_db(ptr::null(), ptr::null_mut(), 0, ptr::null_mut()) },
        FdisacStatus::NullPointer
    );
    assert!(last_error().contains("null"));
    unsafe {
        fdisac_scenario_free(ptr::null_mut());
        fdisac_solution_free(ptr::null_mut());
    }
}

#[test]
fn malformed_config_names_the_key() {
    let (status, msg) = scenario(r#"{"schema_version": 1, "system": {"n_tx": -3}}"#).unwrap_err();
    assert_eq!(status, FdisacStatus::InvalidArgument);
    assert!(msg.contains("system.n_tx"), "{msg}");
    let (status, _) = scenario("not json").unwrap_err();
    assert_eq!(status, FdisacStatus::InvalidArgument);
}

#[test]
fn infeasible_thresholds_map_to_infeasible() {
    let s = scenario(r#"{"schema_version": 1, "system": {"dl_sinr_db": [200, 8, 8]}}"#).unwrap();
    let mut sol = ptr::null_mut();
    let status = unsafe { fdisac_solve(s, &mut sol) };
    assert_eq!(status, FdisacStatus::Infeasible);
    assert!(sol.is_null());
    assert!(last_error().contains("feasible"));
    unsafe { fdisac_scenario_free(s) };
}

#[test]
fn solve_reference_scenario() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fdisac_scenario_default(0, &mut s) }, FdisacStatus::Ok);
    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { fdisac_solve(s, &mut sol) }, FdisacStatus::Ok);

    let mut power = 0.0;
    assert_eq!(unsafe { fdisac_solution_total_power_mw(sol, &mut power) }, FdisacStatus::Ok);
    assert!(power > 0.0 && power.is_finite());
    let mut converged = -1;
    assert_eq!(unsafe { fdisac_solution_converged(sol, &mut converged) }, FdisacStatus::Ok);
    assert_eq!(converged, 1);

    let mut needed = 0;
    let status = unsafe { fdisac_solution_sinrs_db(sol, ptr::null_mut(), 0, &mut needed) };
    assert_eq!((status, needed), (FdisacStatus::BufferTooSmall, 7));
    let mut sinrs = [0.0; 7];
    assert_eq!(unsafe { fdisac_solution_sinrs_db(sol, sinrs.as_mut_ptr(), 7, &mut needed) }, FdisacStatus::Ok);
    let thresholds = [6.0, 5.0, 5.0, 5.0, 8.0, 8.0, 8.0];
    for (got, want) in sinrs.iter().zip(thresholds) {
        assert!(*got >= want - 0.01, "{sinrs:?}");
    }

    let mut pattern = vec![0.0; 181];
    let status = unsafe { fdisac_solution_beampattern_db(sol, 1.0, pattern.as_mut_ptr(), 180, &mut needed) };
    assert_eq!((status, needed), (FdisacStatus::BufferTooSmall, 181));
    let status = unsafe { fdisac_solution_beampattern_db(sol, 1.0, pattern.as_mut_ptr(), 181, &mut needed) };
    assert_eq!(status, FdisacStatus::Ok);
    assert!(pattern[90] - pattern[30] > 15.0 && pattern[90] - pattern[135] > 15.0);
    let status = unsafe { fdisac_solution_beampattern_db(sol, 7.0, pattern.as_mut_ptr(), 181, &mut needed) };
    assert_eq!(status, FdisacStatus::InvalidArgument);

    unsafe {
        fdisac_solution_free(sol);
        fdisac_scenario_free(s);
    }
}

#[test]
fn header_declares_the_interface() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/fdisac.h")).unwrap();
    for name in [
        "fdisac_scenario_from_json",
        "fdisac_scenario_default",
        "fdisac_scenario_free",
        "fdisac_solve",
        "fdisac_solution_free",
        "fdisac_solution_total_power_mw",
        "fdisac_solution_converged",
        "fdisac_solution_sinrs_db",
        "fdisac_solution_beampattern_db",
        "fdisac_last_error_message",
        "fdisac_version",
        "FDISAC_STATUS_BUFFER_TOO_SMALL = 6",
        "typedef struct FdisacScenario FdisacScenario",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = std::env::var("CC").or_else(|_| which("cc").ok_or(())) else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let dir = tempdir();
    let src = dir.join("use_header.c");
    std::fs::write(
        &src,
        "#include \"fdisac.h\"\nint main(void) { FdisacScenario *s = 0; return (int)fdisac_scenario_default(0, &s); }\n",
    )
    .unwrap();
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", concat!(env!("CARGO_MANIFEST_DIR"), "/include")])
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which(name: &str) -> Option<String> {
    std::env::var_os("PATH")?
        .to_str()?
        .split(':')
        .map(|d| format!("{d}/{name}"))
        .find(|p| std::path::Path::new(p).is_file())
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("fdisac-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
