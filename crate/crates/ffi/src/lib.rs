//! C interface to the fdisac solver.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `*_free` function. Every fallible function returns an
//! [`FdisacStatus`]; on failure a description is available from
//! [`fdisac_last_error_message`] on the same thread. Panics never cross the
//! boundary: they are caught and reported as `FDISAC_STATUS_PANIC`.
//!
//! SINR buffers are ordered radar, uplink users, downlink users.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use fdisac::harness::config::ConfigFile;
use fdisac::harness::output::angle_grid;
use fdisac::linalg::linear_to_db;
use fdisac::metrics::beampattern_gain;
use fdisac::scenario::realize_channels;
use fdisac::{ChannelSet, Error, JointSolution};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdisacStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Infeasible = 3,
    SolverFailure = 4,
    Panic = 5,
    BufferTooSmall = 6,
}

/// Validated configuration and the channels it realizes.
pub struct FdisacScenario {
    config: ConfigFile,
    channels: ChannelSet,
}

/// Recovered design together with the channels it was solved for.
pub struct FdisacSolution {
    solution: JointSolution,
    channels: ChannelSet,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: FdisacStatus, msg: impl Into<String>) -> FdisacStatus {
    set_error(msg);
    status
}

fn status_of(err: &Error) -> FdisacStatus {
    match err {
        Error::Config(_) | Error::Domain(_) => FdisacStatus::InvalidArgument,
        Error::InfeasibleInit { .. } => FdisacStatus::Infeasible,
        _ => FdisacStatus::SolverFailure,
    }
}

/// Runs `f`, converting panics into `FDISAC_STATUS_PANIC`.
fn guard(f: impl FnOnce() -> FdisacStatus) -> FdisacStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(FdisacStatus::Panic, format!("panic: {msg}"))
        }
    }
}

fn scenario_from(config: ConfigFile) -> Box<FdisacScenario> {
    let channels = realize_channels(&config.system, config.system.rng_seed);
    Box::new(FdisacScenario { config, channels })
}

/// Parses a configuration document (same schema as the CLI config file).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fdisac_scenario_from_json(json: *const c_char, out: *mut *mut FdisacScenario) -> FdisacStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return fail(FdisacStatus::NullPointer, "null argument");
        }
        *out = std::ptr::null_mut();
        let Ok(text) = CStr::from_ptr(json).to_str() else {
            return fail(FdisacStatus::InvalidArgument, "configuration is not valid UTF-8");
        };
        match ConfigFile::from_json(text) {
            Ok(config) => {
                *out = Box::into_raw(scenario_from(config));
                FdisacStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// The reference scenario with the given channel seed.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fdisac_scenario_default(seed: u64, out: *mut *mut FdisacScenario) -> FdisacStatus {
    guard(|| {
        if out.is_null() {
            return fail(FdisacStatus::NullPointer, "null argument");
        }
        let mut config = ConfigFile::default();
        config.system.rng_seed = seed;
        *out = Box::into_raw(scenario_from(config));
        FdisacStatus::Ok
    })
}

/// # Safety
/// `scenario` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fdisac_scenario_free(scenario: *mut FdisacScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs the joint optimization. On `FDISAC_STATUS_OK` `*out` owns a new
/// solution; otherwise it is set to null.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fdisac_solve(scenario: *const FdisacScenario, out: *mut *mut FdisacSolution) -> FdisacStatus {
    guard(|| {
        if scenario.is_null() || out.is_null() {
            return fail(FdisacStatus::NullPointer, "null argument");
        }
        *out = std::ptr::null_mut();
        let s = &*scenario;
        match fdisac::sca::solve_joint(&s.channels, &s.config.system, &s.config.sca) {
            Ok(solution) => {
                let boxed = FdisacSolution { solution, channels: s.channels.clone() };
                *out = Box::into_raw(Box::new(boxed));
                FdisacStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `solution` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fdisac_solution_free(solution: *mut FdisacSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Total transmit power of the recovered design, in mW.
///
/// # Safety
/// `solution` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fdisac_solution_total_power_mw(solution: *const FdisacSolution, out: *mut f64) -> FdisacStatus {
    guard(|| {
        if solution.is_null() || out.is_null() {
            return fail(FdisacStatus::NullPointer, "null argument");
        }
        *out = (*solution).solution.total_power_mw();
        FdisacStatus::Ok
    })
}

/// Writes 1 to `*out` if the iteration met its tolerance, 0 if it stopped at
/// the iteration limit.
///
/// # Safety
/// `solution` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fdisac_solution_converged(solution: *const FdisacSolution, out: *mut i32) -> FdisacStatus {
    guard(|| {
        if solution.is_null() || out.is_null() {
            return fail(FdisacStatus::NullPointer, "null argument");
        }
        *out = i32::from((*solution).solution.trace.converged());
        FdisacStatus::Ok
    })
}

/// Copies `values` into `buf` after storing the required length in `needed`.
unsafe fn copy_out(values: &[f64], buf: *mut f64, len: usize, needed: *mut usize) -> FdisacStatus {
    if !needed.is_null() {
        *needed = values.len();
    }
    if buf.is_null() || len < values.len() {
        return fail(FdisacStatus::BufferTooSmall, format!("buffer holds {len} values, {} needed", values.len()));
    }
    std::ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    FdisacStatus::Ok
}

/// Achieved SINRs in dB (radar, uplink users, downlink users). `*needed`
/// receives the number of entries; pass a null `buf` to query it.
///
/// # Safety
/// `solution` must be a live handle; `buf` must hold `len` doubles; `needed`
/// may be null.
#[no_mangle]
pub unsafe extern "C" fn fdisac_solution_sinrs_db(
    solution: *const FdisacSolution,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
) -> FdisacStatus {
    guard(|| {
        if solution.is_null() {
            return fail(FdisacStatus::NullPointer, "null argument");
        }
        let values: Vec<f64> = (*solution).solution.sinrs.entries().iter().map(|(_, v)| linear_to_db(*v)).collect();
        copy_out(&values, buf, len, needed)
    })
}

/// Beampattern gain in dB on the grid −90°, −90° + step, …, 90°.
///
/// # Safety
/// `solution` must be a live handle; `buf` must hold `len` doubles; `needed`
/// may be null.
#[no_mangle]
pub unsafe extern "C" fn fdisac_solution_beampattern_db(
    solution: *const FdisacSolution,
    step_deg: f64,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
) -> FdisacStatus {
    guard(|| {
        if solution.is_null() {
            return fail(FdisacStatus::NullPointer, "null argument");
        }
        let s = &*solution;
        let angles = match angle_grid(step_deg) {
            Ok(a) => a,
            Err(e) => return fail(FdisacStatus::InvalidArgument, e.to_string()),
        };
        match beampattern_gain(&s.solution.receive.u, &s.solution.transmit, &s.channels, &angles) {
            Ok(g) => copy_out(&g.into_iter().map(linear_to_db).collect::<Vec<_>>(), buf, len, needed),
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Message of the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fdisac_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |m| m.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fdisac_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
