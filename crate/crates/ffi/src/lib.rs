//! C ABI over the relvac simulator: opaque handles, integer status codes,
//! and a thread-local last-error message. The committed header lives at
//! `include/relvac.h`; regenerate it with cbindgen after changing this
//! surface.

use relvac::eos::{self, ThermoParams};
use relvac::error::Error;
use relvac::io::{write_energy_csv, RunConfig};
use relvac::solver::{run, Trajectory};
use std::cell::RefCell;
use std::ffi::{c_char, c_double, CStr, CString};
use std::path::Path;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RvStatus {
    RvOk = 0,
    /// Malformed configuration or arguments.
    RvInvalidInput = 1,
    /// Physically inadmissible values (vacuum, superluminal, ...).
    RvDomainError = 2,
    /// The run stopped at a breakdown state; partial data is available.
    RvAborted = 3,
    RvIoError = 4,
    RvInternal = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|c| *c.borrow_mut() = msg);
}

fn status_for(err: &Error) -> RvStatus {
    match err {
        Error::InvalidInput(_)
        | Error::Config(_)
        | Error::Expr(_)
        | Error::InvalidWeight(_)
        | Error::UnsupportedExponent(_) => RvStatus::RvInvalidInput,
        Error::Domain(_) | Error::Superluminal { .. } | Error::DegenerateMap { .. } => {
            RvStatus::RvDomainError
        }
        Error::SimulationAborted { .. } => RvStatus::RvAborted,
        Error::Io { .. } => RvStatus::RvIoError,
    }
}

/// Message describing the most recent failure on this thread. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rv_last_error() -> *const c_char {
    LAST_ERROR.with(|c| c.borrow().as_ptr())
}

/// Library version string (static storage).
#[no_mangle]
pub extern "C" fn rv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Opaque trajectory handle.
pub struct RvTrajectory {
    inner: Trajectory,
}

/// Number of f64 values per log row (matches the energy CSV columns).
pub const RV_ROW_LEN: usize = 11;

unsafe fn cstr_arg<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, RvStatus> {
    if ptr.is_null() {
        set_error(&format!("{what} is null"));
        return Err(RvStatus::RvInvalidInput);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(&format!("{what} is not valid UTF-8"));
        RvStatus::RvInvalidInput
    })
}

/// Run a simulation from a JSON configuration document (the same schema the
/// `relvac simulate` subcommand reads). On success `*out` owns the
/// trajectory; release it with [`rv_trajectory_free`].
///
/// # Safety
/// `config_json` must point to a NUL-terminated string and `out` to a valid
/// pointer slot; both must outlive the call.
#[no_mangle]
pub unsafe extern "C" fn rv_simulate_json(
    config_json: *const c_char,
    out: *mut *mut RvTrajectory,
) -> RvStatus {
    if out.is_null() {
        set_error("output handle pointer is null");
        return RvStatus::RvInvalidInput;
    }
    *out = std::ptr::null_mut();
    let text = match cstr_arg(config_json, "config_json") {
        Ok(t) => t,
        Err(s) => return s,
    };
    let cfg = match RunConfig::from_json(text).and_then(|c| c.to_solver_config()) {
        Ok(c) => c,
        Err(e) => {
            set_error(&e.to_string());
            return status_for(&e);
        }
    };
    match run(&cfg) {
        Ok(traj) => {
            *out = Box::into_raw(Box::new(RvTrajectory { inner: traj }));
            RvStatus::RvOk
        }
        Err(e) => {
            set_error(&e.to_string());
            // hand the partial trajectory back on breakdown
            if let Error::SimulationAborted { partial, .. } = e {
                *out = Box::into_raw(Box::new(RvTrajectory { inner: *partial }));
                return RvStatus::RvAborted;
            }
            status_for(&e)
        }
    }
}

/// Number of logged cadence rows in the trajectory.
///
/// # Safety
/// `traj` must be a live handle from [`rv_simulate_json`].
#[no_mangle]
pub unsafe extern "C" fn rv_trajectory_rows(traj: *const RvTrajectory) -> usize {
    if traj.is_null() {
        return 0;
    }
    (*traj).inner.reports.len()
}

/// Copy row `i` into `out[0..11]`:
/// `t, E_I, E_II, E_III, E_IV, E_total, g0_defect, energy_drift, chi_h_res,
/// min_J, max_eps_v`.
///
/// # Safety
/// `traj` must be a live handle and `out` must point to at least
/// [`RV_ROW_LEN`] doubles.
#[no_mangle]
pub unsafe extern "C" fn rv_trajectory_row(
    traj: *const RvTrajectory,
    i: usize,
    out: *mut c_double,
) -> RvStatus {
    if traj.is_null() || out.is_null() {
        set_error("null trajectory or output pointer");
        return RvStatus::RvInvalidInput;
    }
    let reports = &(*traj).inner.reports;
    let Some(r) = reports.get(i) else {
        set_error(&format!("row {i} out of range ({} rows)", reports.len()));
        return RvStatus::RvInvalidInput;
    };
    let row = [
        r.time,
        r.e1,
        r.e2,
        r.e3,
        r.e4,
        r.e_total,
        r.g0_defect,
        r.energy_drift,
        r.chi_h_res,
        r.min_j,
        r.max_eps_v,
    ];
    std::ptr::copy_nonoverlapping(row.as_ptr(), out, RV_ROW_LEN);
    RvStatus::RvOk
}

/// Number of events (bracket violations etc.) recorded during the run.
///
/// # Safety
/// `traj` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rv_trajectory_events(traj: *const RvTrajectory) -> usize {
    if traj.is_null() {
        return 0;
    }
    (*traj).inner.events.len()
}

/// Write the energy log as CSV (same format as the CLI).
///
/// # Safety
/// `traj` must be a live handle, `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rv_trajectory_write_csv(
    traj: *const RvTrajectory,
    path: *const c_char,
) -> RvStatus {
    if traj.is_null() {
        set_error("null trajectory handle");
        return RvStatus::RvInvalidInput;
    }
    let path = match cstr_arg(path, "path") {
        Ok(p) => p,
        Err(s) => return s,
    };
    match write_energy_csv(Path::new(path), &(*traj).inner.reports) {
        Ok(()) => RvStatus::RvOk,
        Err(e) => {
            set_error(&e.to_string());
            status_for(&e)
        }
    }
}

/// Release a trajectory handle. Passing null is a no-op; passing a handle
/// twice is undefined behavior.
///
/// # Safety
/// `traj` must be null or a handle obtained from this library and not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn rv_trajectory_free(traj: *mut RvTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Squared sound speed at particle number density `n`.
#[no_mangle]
pub extern "C" fn rv_sound_speed_sq(
    n: c_double,
    gamma: c_double,
    eps: c_double,
    out: *mut c_double,
) -> RvStatus {
    scalar_out(out, || {
        let p = ThermoParams::new(gamma, eps)?;
        eos::sound_speed_sq(n, &p)
    })
}

/// Lorentz factor of velocity `(vx, vy, vz)`.
#[no_mangle]
pub extern "C" fn rv_lorentz_factor(
    vx: c_double,
    vy: c_double,
    vz: c_double,
    eps: c_double,
    out: *mut c_double,
) -> RvStatus {
    scalar_out(out, || {
        let p = ThermoParams::new(2.0, eps)?;
        eos::lorentz_factor([vx, vy, vz], &p)
    })
}

/// Particle number density from energy density (inverts the equation of
/// state).
#[no_mangle]
pub extern "C" fn rv_number_density(
    rho: c_double,
    gamma: c_double,
    eps: c_double,
    out: *mut c_double,
) -> RvStatus {
    scalar_out(out, || {
        let p = ThermoParams::new(gamma, eps)?;
        eos::number_density_from_energy_density(rho, &p)
    })
}

fn scalar_out(out: *mut c_double, f: impl FnOnce() -> relvac::Result<f64>) -> RvStatus {
    if out.is_null() {
        set_error("null output pointer");
        return RvStatus::RvInvalidInput;
    }
    match f() {
        Ok(v) => {
            // SAFETY: checked non-null above; caller promises a valid slot.
            unsafe { *out = v };
            RvStatus::RvOk
        }
        Err(e) => {
            set_error(&e.to_string());
            status_for(&e)
        }
    }
}

/// Run the fast verification suite; `*failures` receives the number of
/// failed checks. Returns RvOk when everything passed.
///
/// # Safety
/// `failures` must be null or point to a valid usize slot.
#[no_mangle]
pub unsafe extern "C" fn rv_verify_quick(failures: *mut usize) -> RvStatus {
    let results = relvac::checks::quick_suite();
    let failed = results.iter().filter(|r| !r.passed).count();
    if !failures.is_null() {
        *failures = failed;
    }
    if failed == 0 {
        RvStatus::RvOk
    } else {
        set_error(&format!("{failed} verification checks failed"));
        RvStatus::RvInternal
    }
}
