//! C ABI over the `lamperti` library.
//!
//! Every fallible function returns a [`LampertiStatus`] and writes its result
//! through an out-pointer. On failure, [`lamperti_last_error`] describes the
//! most recent error on the calling thread. Handles are opaque and must be
//! released with their `_free` function; strings returned by the library are
//! released with [`lamperti_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lamperti::config::RunConfig;
use lamperti::engine::{run_ensemble_with, RunControl, TrajectoryRecord};
use lamperti::models::bd_probs;
use lamperti::models::BdChainParams;
use lamperti::report;
use lamperti::theory;
use lamperti::Error;

/// Result codes. `LAMPERTI_STATUS_OK` is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LampertiStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Config = 3,
    InsufficientData = 4,
    FitDegenerate = 5,
    Unsupported = 6,
    ResourceLimit = 7,
    Interrupted = 8,
    Parse = 9,
    Io = 10,
    InvalidUtf8 = 11,
    OutOfRange = 12,
    Panic = 13,
}

impl From<&Error> for LampertiStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain { .. } => LampertiStatus::Domain,
            Error::Config { .. } => LampertiStatus::Config,
            Error::InsufficientData { .. } => LampertiStatus::InsufficientData,
            Error::FitDegenerate(_) => LampertiStatus::FitDegenerate,
            Error::Unsupported(_) => LampertiStatus::Unsupported,
            Error::ResourceLimit { .. } => LampertiStatus::ResourceLimit,
            Error::Interrupted { .. } => LampertiStatus::Interrupted,
            Error::Parse(_) => LampertiStatus::Parse,
            Error::Io(_) => LampertiStatus::Io,
        }
    }
}

/// A validated run configuration.
pub struct LampertiConfig {
    inner: RunConfig,
}

/// Simulated trajectories of one ensemble run.
pub struct LampertiEnsemble {
    records: Vec<TrajectoryRecord>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: LampertiStatus, msg: impl Into<String>) -> LampertiStatus {
    set_error(msg);
    status
}

fn fail_with(e: &Error) -> LampertiStatus {
    fail(e.into(), e.to_string())
}

fn guard(f: impl FnOnce() -> LampertiStatus) -> LampertiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(LampertiStatus::Panic, "internal panic"),
    }
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, LampertiStatus> {
    if p.is_null() {
        return Err(fail(LampertiStatus::NullPointer, "string argument is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(LampertiStatus::InvalidUtf8, "string argument is not UTF-8"))
}

fn write_f64(out: *mut f64, r: lamperti::Result<f64>) -> LampertiStatus {
    if out.is_null() {
        return fail(LampertiStatus::NullPointer, "out is null");
    }
    match r {
        Ok(v) => {
            unsafe { *out = v };
            LampertiStatus::Ok
        }
        Err(e) => fail_with(&e),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lamperti_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lamperti_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lamperti_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `(a (1 + beta))^(1 / (1 + beta))`.
///
/// # Safety
/// `out` must be valid for one `double` write.
#[no_mangle]
pub unsafe extern "C" fn lamperti_lambda_const(a: f64, beta: f64, out: *mut f64) -> LampertiStatus {
    guard(|| write_f64(out, theory::lambda_const(a, beta)))
}

/// # Safety
/// `out` must be valid for one `double` write.
#[no_mangle]
pub unsafe extern "C" fn lamperti_clt_std(sigma: f64, beta: f64, out: *mut f64) -> LampertiStatus {
    guard(|| write_f64(out, theory::clt_std(sigma, beta)))
}

/// # Safety
/// `out` must be valid for one `double` write.
#[no_mangle]
pub unsafe extern "C" fn lamperti_bd_clt_std(b: f64, beta: f64, out: *mut f64) -> LampertiStatus {
    guard(|| write_f64(out, theory::bd_clt_std(b, beta)))
}

/// Up, hold and down probabilities of the birth-death chain at `x`, written
/// to `out[0..3]`.
///
/// # Safety
/// `out` must be valid for three `double` writes.
#[no_mangle]
pub unsafe extern "C" fn lamperti_bd_probs(
    beta: f64,
    rho: f64,
    b: f64,
    x: u64,
    out: *mut f64,
) -> LampertiStatus {
    guard(|| {
        if out.is_null() {
            return fail(LampertiStatus::NullPointer, "out is null");
        }
        let p = BdChainParams { beta, rho, b };
        if let Err(e) = p.validate("model") {
            return fail_with(&e);
        }
        let (a, h, c) = bd_probs(&p, x);
        let out = std::slice::from_raw_parts_mut(out, 3);
        out.copy_from_slice(&[a, h, c]);
        LampertiStatus::Ok
    })
}

/// Parses and validates a JSON run configuration.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for one
/// pointer write.
#[no_mangle]
pub unsafe extern "C" fn lamperti_config_from_json(
    json: *const c_char,
    out: *mut *mut LampertiConfig,
) -> LampertiStatus {
    guard(|| {
        if out.is_null() {
            return fail(LampertiStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match RunConfig::from_json(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(LampertiConfig { inner }));
                LampertiStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// # Safety
/// `cfg` must be NULL or a handle from [`lamperti_config_from_json`].
#[no_mangle]
pub unsafe extern "C" fn lamperti_config_free(cfg: *mut LampertiConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Hex SHA-256 of the experiment definition. Free with
/// [`lamperti_string_free`].
///
/// # Safety
/// `cfg` must be a live config handle; `out` valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn lamperti_config_hash(cfg: *const LampertiConfig, out: *mut *mut c_char) -> LampertiStatus {
    guard(|| {
        if cfg.is_null() || out.is_null() {
            return fail(LampertiStatus::NullPointer, "null argument");
        }
        *out = to_c_string((*cfg).inner.hash());
        LampertiStatus::Ok
    })
}

/// Simulates the ensemble of `cfg`. Worker threads follow
/// `LAMPERTI_THREADS`.
///
/// # Safety
/// `cfg` must be a live config handle; `out` valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn lamperti_ensemble_run(
    cfg: *const LampertiConfig,
    out: *mut *mut LampertiEnsemble,
) -> LampertiStatus {
    guard(|| {
        if cfg.is_null() || out.is_null() {
            return fail(LampertiStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        let cfg = &(*cfg).inner;
        match run_ensemble_with(&cfg.model, &cfg.effective_engine(), &RunControl::from_env()) {
            Ok(records) => {
                *out = Box::into_raw(Box::new(LampertiEnsemble { records }));
                LampertiStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// # Safety
/// `ens` must be NULL or a handle from [`lamperti_ensemble_run`].
#[no_mangle]
pub unsafe extern "C" fn lamperti_ensemble_free(ens: *mut LampertiEnsemble) {
    if !ens.is_null() {
        drop(Box::from_raw(ens));
    }
}

/// Number of trajectories and of grid samples per trajectory.
///
/// # Safety
/// `ens` must be a live ensemble handle; the out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn lamperti_ensemble_shape(
    ens: *const LampertiEnsemble,
    n_traj: *mut usize,
    n_samples: *mut usize,
) -> LampertiStatus {
    guard(|| {
        if ens.is_null() || n_traj.is_null() || n_samples.is_null() {
            return fail(LampertiStatus::NullPointer, "null argument");
        }
        let recs = &(*ens).records;
        *n_traj = recs.len();
        *n_samples = recs.first().map_or(0, |r| r.samples.len());
        LampertiStatus::Ok
    })
}

/// Copies the grid samples of trajectory `traj` into `t`, `x` and
/// `running_max`, each holding at least `cap` elements. Any of the three may
/// be NULL to skip it.
///
/// # Safety
/// `ens` must be a live ensemble handle; each non-NULL buffer must be valid
/// for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn lamperti_ensemble_samples(
    ens: *const LampertiEnsemble,
    traj: usize,
    t: *mut u64,
    x: *mut f64,
    running_max: *mut f64,
    cap: usize,
) -> LampertiStatus {
    guard(|| {
        if ens.is_null() {
            return fail(LampertiStatus::NullPointer, "ensemble is null");
        }
        let Some(rec) = (&(*ens).records).get(traj) else {
            return fail(LampertiStatus::OutOfRange, format!("trajectory {traj} out of range"));
        };
        let n = rec.samples.len();
        if cap < n {
            return fail(LampertiStatus::OutOfRange, format!("buffer holds {cap}, need {n}"));
        }
        for (k, s) in rec.samples.iter().enumerate() {
            if !t.is_null() {
                *t.add(k) = s.t;
            }
            if !x.is_null() {
                *x.add(k) = s.x;
            }
            if !running_max.is_null() {
                *running_max.add(k) = s.running_max;
            }
        }
        LampertiStatus::Ok
    })
}

fn report_json(r: lamperti::Result<report::VerificationReport>, out: *mut *mut c_char) -> LampertiStatus {
    match r.and_then(|rep| serde_json::to_string_pretty(&rep).map_err(|e| Error::Parse(e.to_string()))) {
        Ok(s) => {
            unsafe { *out = to_c_string(s) };
            LampertiStatus::Ok
        }
        Err(e) => fail_with(&e),
    }
}

/// Runs the checks of `cfg` against an existing ensemble and returns the
/// report as JSON. Free with [`lamperti_string_free`].
///
/// # Safety
/// `cfg` and `ens` must be live handles; `out` valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn lamperti_ensemble_verify(
    cfg: *const LampertiConfig,
    ens: *const LampertiEnsemble,
    out: *mut *mut c_char,
) -> LampertiStatus {
    guard(|| {
        if cfg.is_null() || ens.is_null() || out.is_null() {
            return fail(LampertiStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        report_json(report::evaluate(&(*cfg).inner, &(*ens).records), out)
    })
}

/// Simulates and verifies in one call; the report is returned as JSON.
///
/// # Safety
/// `cfg` must be a live config handle; `out` valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn lamperti_verify(cfg: *const LampertiConfig, out: *mut *mut c_char) -> LampertiStatus {
    guard(|| {
        if cfg.is_null() || out.is_null() {
            return fail(LampertiStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        report_json(report::verify(&(*cfg).inner, &RunControl::from_env()), out)
    })
}
