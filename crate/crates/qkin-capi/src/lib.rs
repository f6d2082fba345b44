//! C ABI for the quaternion kinematics toolkit.
//!
//! Conventions:
//! - Functions return [`QkinStatus`]; results come back through out-pointers.
//! - Strings returned through out-pointers are NUL-terminated, allocated by
//!   this library, and must be released with [`qkin_string_free`].
//! - Opaque handles ([`QkinSkeleton`]) are created and destroyed here; never
//!   free them with anything but their `_free` function.
//! - On failure, a thread-local message describing the error is available
//!   via [`qkin_last_error_message`] until the next failing call on the same
//!   thread.
//!
//! The generated header lives at `include/qkin.h`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use libc::c_char;

use qkin::metrics::ContactConfig;
use qkin::runner::{eval_metrics, simulate, RunConfig};
use qkin::skeleton::Skeleton;
use qkin::synth::{corrupt, generate, MotionSpec};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QkinStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Configuration, schema, or input data was invalid.
    InvalidConfig = 3,
    /// File system failure.
    Io = 4,
    /// The simulation exceeded its numeric guards.
    NumericDivergence = 5,
    /// Unexpected internal failure.
    Internal = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " "))
        .unwrap_or_else(|_| CString::new("error message unavailable").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

fn status_of(err: &qkin::Error) -> QkinStatus {
    match err {
        qkin::Error::Io(_) => QkinStatus::Io,
        qkin::Error::Divergence { .. } => QkinStatus::NumericDivergence,
        _ => QkinStatus::InvalidConfig,
    }
}

fn fail(err: qkin::Error) -> QkinStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

/// Run a closure, translating panics into `Internal`.
fn guarded(f: impl FnOnce() -> QkinStatus) -> QkinStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic".into());
            QkinStatus::Internal
        }
    }
}

/// # Safety
/// `ptr` must be non-null and point to a NUL-terminated string.
unsafe fn utf8_arg<'a>(ptr: *const c_char) -> Result<&'a str, QkinStatus> {
    if ptr.is_null() {
        set_error("null pointer argument".into());
        return Err(QkinStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8".into());
        QkinStatus::InvalidUtf8
    })
}

fn out_string(out: *mut *mut c_char, text: String) -> QkinStatus {
    let c = match CString::new(text) {
        Ok(c) => c,
        Err(_) => {
            set_error("output contained an interior NUL byte".into());
            return QkinStatus::Internal;
        }
    };
    unsafe { *out = c.into_raw() };
    QkinStatus::Ok
}

/// Library version as a static NUL-terminated string. Do not free.
#[no_mangle]
pub extern "C" fn qkin_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent error on this thread, or null if none.
/// Valid until the next failing call on the same thread. Do not free.
#[no_mangle]
pub extern "C" fn qkin_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |msg| msg.as_ptr())
    })
}

/// Release a string returned by this library.
///
/// # Safety
/// `ptr` must have been returned through an out-string parameter of this
/// library and not freed before. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn qkin_string_free(ptr: *mut c_char) {
    if !ptr.is_null() {
        drop(CString::from_raw(ptr));
    }
}

/// Opaque skeleton handle.
pub struct QkinSkeleton {
    inner: Skeleton,
}

/// The built-in 24-joint humanoid. Free with [`qkin_skeleton_free`].
#[no_mangle]
pub extern "C" fn qkin_skeleton_default() -> *mut QkinSkeleton {
    Box::into_raw(Box::new(QkinSkeleton {
        inner: Skeleton::default_humanoid(),
    }))
}

/// Load a skeleton definition from a JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qkin_skeleton_load(
    path: *const c_char,
    out: *mut *mut QkinSkeleton,
) -> QkinStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer".into());
            return QkinStatus::NullPointer;
        }
        let path = match utf8_arg(path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match Skeleton::load(Path::new(path)) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(QkinSkeleton { inner }));
                QkinStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of joints, or -1 for a null handle.
///
/// # Safety
/// `skel` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn qkin_skeleton_joint_count(skel: *const QkinSkeleton) -> i32 {
    if skel.is_null() {
        return -1;
    }
    (*skel).inner.len() as i32
}

/// Destroy a skeleton handle. Null is ignored.
///
/// # Safety
/// `skel` must have come from this library and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn qkin_skeleton_free(skel: *mut QkinSkeleton) {
    if !skel.is_null() {
        drop(Box::from_raw(skel));
    }
}

/// Run a full simulation described by a JSON run configuration and return
/// the report (config echo, per-seed metrics, mean and spread) as JSON.
///
/// # Safety
/// `config_json` must be NUL-terminated; `out_report_json` must be valid.
/// The returned string is freed with [`qkin_string_free`].
#[no_mangle]
pub unsafe extern "C" fn qkin_simulate_json(
    config_json: *const c_char,
    out_report_json: *mut *mut c_char,
) -> QkinStatus {
    guarded(|| {
        if out_report_json.is_null() {
            set_error("null output pointer".into());
            return QkinStatus::NullPointer;
        }
        let text = match utf8_arg(config_json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let cfg = match RunConfig::from_json(text) {
            Ok(c) => c,
            Err(e) => return fail(e),
        };
        match simulate(&cfg) {
            Ok(out) => out_string(
                out_report_json,
                serde_json::to_string_pretty(&out.report).expect("report serializes"),
            ),
            Err(e) => fail(e),
        }
    })
}

/// Evaluate the metric suite between two pose files (JSON-lines). A null
/// skeleton handle selects the built-in humanoid.
///
/// # Safety
/// Paths must be NUL-terminated; `out_report_json` must be valid; `skel`
/// must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qkin_eval_metrics(
    pred_path: *const c_char,
    gt_path: *const c_char,
    skel: *const QkinSkeleton,
    out_report_json: *mut *mut c_char,
) -> QkinStatus {
    guarded(|| {
        if out_report_json.is_null() {
            set_error("null output pointer".into());
            return QkinStatus::NullPointer;
        }
        let pred = match utf8_arg(pred_path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        let gt = match utf8_arg(gt_path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        let default_skel;
        let skeleton = if skel.is_null() {
            default_skel = Skeleton::default_humanoid();
            &default_skel
        } else {
            &(*skel).inner
        };
        match eval_metrics(
            Path::new(pred),
            Path::new(gt),
            skeleton,
            &ContactConfig::default(),
        ) {
            Ok(report) => out_string(
                out_report_json,
                serde_json::to_string_pretty(&report).expect("report serializes"),
            ),
            Err(e) => fail(e),
        }
    })
}

/// Generate a synthetic motion from a JSON spec, writing the clean sequence
/// to `clean_path` and, when `references_path` is non-null, the noisy
/// references next to it.
///
/// # Safety
/// `spec_json` and `clean_path` must be NUL-terminated; `references_path`
/// may be null.
#[no_mangle]
pub unsafe extern "C" fn qkin_generate(
    spec_json: *const c_char,
    clean_path: *const c_char,
    references_path: *const c_char,
) -> QkinStatus {
    guarded(|| {
        let text = match utf8_arg(spec_json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let clean_path = match utf8_arg(clean_path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        let spec: MotionSpec = match serde_json::from_str(text) {
            Ok(s) => s,
            Err(e) => return fail(qkin::Error::Json(e)),
        };
        let clean = match generate(&spec) {
            Ok(c) => c,
            Err(e) => return fail(e),
        };
        if let Err(e) = clean.save(Path::new(clean_path)) {
            return fail(e);
        }
        if !references_path.is_null() {
            let ref_path = match utf8_arg(references_path) {
                Ok(p) => p,
                Err(status) => return status,
            };
            let noisy = corrupt(&clean, spec.angular_sigma, spec.positional_sigma, spec.seed);
            if let Err(e) = noisy.save(Path::new(ref_path)) {
                return fail(e);
            }
        }
        QkinStatus::Ok
    })
}
