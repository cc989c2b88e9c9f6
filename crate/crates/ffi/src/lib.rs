//! C ABI over `cobord`. Laws are opaque handles; reports cross the boundary
//! as NUL-terminated JSON strings owned by the library.
//!
//! Every fallible call returns a [`CobordStatus`] and, on failure, leaves a
//! message for [`cobord_last_error_message`] on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cobord::bivariant::{run_check, Bivariant, Budget, Check, SkippedPullback, Universal};
use cobord::exactalg::GradedRing;
use cobord::fgl::FormalGroupLaw;
use cobord::spaces::grr_check;

/// Result of a call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CobordStatus {
    Ok = 0,
    /// The computation ran and found a failing identity or axiom.
    Violation = 1,
    InvalidArgument = 2,
    NullPointer = 3,
    /// The library rejected the computation, e.g. a parameter out of range.
    ComputationFailed = 4,
    /// An internal panic was caught at the boundary.
    Panic = 5,
}

/// Which bivariant engine to check.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CobordEngine {
    Universal = 0,
    /// The engine whose product skips a pullback; fails the axioms.
    SkippedPullback = 1,
}

/// Sizes, trial counts and seed for the bivariant checker.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CobordBudget {
    /// Largest set swept exhaustively; 0 skips the sweep.
    pub exhaustive_size: u32,
    /// Largest set in random trials.
    pub max_size: u32,
    pub max_fiber: u32,
    pub trials: u64,
    pub seed: u64,
}

/// A formal group law with its inverse and difference law.
pub struct CobordFgl {
    law: FormalGroupLaw,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    let c = CString::new(text).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<CobordStatus, (CobordStatus, String)>) -> CobordStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {message}"));
            CobordStatus::Panic
        }
    }
}

fn failed(e: cobord::Error) -> (CobordStatus, String) {
    (CobordStatus::ComputationFailed, e.to_string())
}

fn null(what: &str) -> (CobordStatus, String) {
    (CobordStatus::NullPointer, format!("{what} is null"))
}

/// Writes a fresh C string to `*out`.
///
/// # Safety
/// `out` must be null or valid for a pointer write.
unsafe fn emit_string(out: *mut *mut c_char, text: String) -> Result<(), (CobordStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    let c = CString::new(text).map_err(|_| (CobordStatus::ComputationFailed, "output contains NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

/// # Safety
/// `out` must be null or valid for a pointer write.
unsafe fn emit_law(out: *mut *mut CobordFgl, law: cobord::Result<FormalGroupLaw>) -> CobordStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let law = law.map_err(failed)?;
        *out = Box::into_raw(Box::new(CobordFgl { law }));
        Ok(CobordStatus::Ok)
    })
}

/// The universal law over the Lazard ring through coefficient degree `degree`.
///
/// # Safety
/// `out` must be valid for a pointer write. Release the handle with [`cobord_fgl_free`].
#[no_mangle]
pub unsafe extern "C" fn cobord_fgl_universal(degree: u32, out: *mut *mut CobordFgl) -> CobordStatus {
    if degree > cobord::cli::MAX_DEGREE {
        set_error(format!("degree {degree} above the maximum {}", cobord::cli::MAX_DEGREE));
        return CobordStatus::InvalidArgument;
    }
    emit_law(out, FormalGroupLaw::universal(degree))
}

/// `x + y` over the integers, kept through degree `cap`.
///
/// # Safety
/// `out` must be valid for a pointer write. Release the handle with [`cobord_fgl_free`].
#[no_mangle]
pub unsafe extern "C" fn cobord_fgl_additive(cap: u32, out: *mut *mut CobordFgl) -> CobordStatus {
    emit_law(out, FormalGroupLaw::additive(&GradedRing::integers(0), cap))
}

/// `x + y - beta x y` over `Z[beta, beta^-1]`, kept through degree `cap`.
///
/// # Safety
/// `out` must be valid for a pointer write. Release the handle with [`cobord_fgl_free`].
#[no_mangle]
pub unsafe extern "C" fn cobord_fgl_multiplicative(cap: u32, out: *mut *mut CobordFgl) -> CobordStatus {
    emit_law(out, FormalGroupLaw::multiplicative_periodic(cap))
}

/// Degree through which the law is known, or 0 for a null handle.
///
/// # Safety
/// `law` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cobord_fgl_cap(law: *const CobordFgl) -> u32 {
    law.as_ref().map_or(0, |l| l.law.cap())
}

/// The law as JSON with keys `cap`, `ring`, `F`, `inverse`, `difference`.
///
/// # Safety
/// `law` must be a live handle and `out` valid for a pointer write.
/// Release the string with [`cobord_string_free`].
#[no_mangle]
pub unsafe extern "C" fn cobord_fgl_to_json(law: *const CobordFgl, out: *mut *mut c_char) -> CobordStatus {
    guard(|| {
        let law = law.as_ref().ok_or_else(|| null("law"))?;
        let json = serde_json::to_string(&law.law.to_json()).expect("law serializes");
        emit_string(out, json)?;
        Ok(CobordStatus::Ok)
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `law` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cobord_fgl_free(law: *mut CobordFgl) {
    if !law.is_null() {
        drop(Box::from_raw(law));
    }
}

/// Euler characteristic of `O(d)` on `P^n` three ways, as JSON with keys
/// `k_side`, `ch_side`, `binomial`, `agree`. Returns `Violation` if they differ.
///
/// # Safety
/// `out` must be valid for a pointer write. Release the string with [`cobord_string_free`].
#[no_mangle]
pub unsafe extern "C" fn cobord_hrr(n: u32, d: i64, out: *mut *mut c_char) -> CobordStatus {
    guard(|| {
        let report = grr_check(n, d).map_err(|e| (CobordStatus::InvalidArgument, e.to_string()))?;
        emit_string(out, serde_json::to_string(&report).expect("report serializes"))?;
        Ok(if report.agree {
            CobordStatus::Ok
        } else {
            CobordStatus::Violation
        })
    })
}

/// The checker's default budget.
#[no_mangle]
pub extern "C" fn cobord_budget_default() -> CobordBudget {
    let b = Budget::default();
    CobordBudget {
        exhaustive_size: b.exhaustive_size as u32,
        max_size: b.max_size as u32,
        max_fiber: b.max_fiber,
        trials: b.trials,
        seed: b.seed,
    }
}

/// Runs one bivariant check by name (`"a12"`, `"section-lemma"`, ...), or
/// every axiom for `"all"`. Writes a JSON array of reports; returns
/// `Violation` if any check found a counterexample.
///
/// # Safety
/// `check` must be a NUL-terminated string and `out` valid for a pointer
/// write. Release the string with [`cobord_string_free`].
#[no_mangle]
pub unsafe extern "C" fn cobord_bivariant_check(
    check: *const c_char,
    budget: CobordBudget,
    engine: CobordEngine,
    out: *mut *mut c_char,
) -> CobordStatus {
    guard(|| {
        if check.is_null() {
            return Err(null("check name"));
        }
        let name = CStr::from_ptr(check)
            .to_str()
            .map_err(|_| (CobordStatus::InvalidArgument, "check name is not UTF-8".into()))?;
        let checks: Vec<Check> = match name {
            "all" => Check::axioms().to_vec(),
            other => vec![Check::from_name(other)
                .ok_or_else(|| (CobordStatus::InvalidArgument, format!("unknown check `{other}`")))?],
        };
        let max = cobord::cli::MAX_SET_SIZE as u32;
        if budget.max_size > max || budget.exhaustive_size > max.min(4) {
            return Err((CobordStatus::InvalidArgument, "set size above the checker maximum".into()));
        }
        let budget = Budget {
            exhaustive_size: budget.exhaustive_size as usize,
            max_size: budget.max_size as usize,
            max_fiber: budget.max_fiber,
            trials: budget.trials,
            seed: budget.seed,
        };
        let engine: &dyn Bivariant = match engine {
            CobordEngine::Universal => &Universal,
            CobordEngine::SkippedPullback => &SkippedPullback,
        };
        let reports: Vec<_> = checks.iter().map(|&c| run_check(c, engine, &budget)).collect();
        let violation = reports.iter().any(|r| !r.passed);
        emit_string(out, serde_json::to_string(&reports).expect("reports serialize"))?;
        Ok(if violation {
            CobordStatus::Violation
        } else {
            CobordStatus::Ok
        })
    })
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cobord_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn cobord_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[cfg(test)]
mod tests {
    use super::*;

    unsafe fn take(s: *mut c_char) -> String {
        let text = CStr::from_ptr(s).to_str().unwrap().to_owned();
        cobord_string_free(s);
        text
    }

    unsafe fn last_error() -> String {
        CStr::from_ptr(cobord_last_error_message()).to_str().unwrap().to_owned()
    }

    #[test]
    fn law_handles_round_trip() {
        unsafe {
            let mut law = ptr::null_mut();
            assert_eq!(cobord_fgl_universal(3, &mut law), CobordStatus::Ok);
            assert_eq!(cobord_fgl_cap(law), 4);
            let mut json = ptr::null_mut();
            assert_eq!(cobord_fgl_to_json(law, &mut json), CobordStatus::Ok);
            let text = take(json);
            assert!(text.contains("a11*x*y"));
            let parsed: cobord::fgl::FglJson = serde_json::from_str(&text).unwrap();
            assert_eq!(parsed.cap, 4);
            cobord_fgl_free(law);

            for make in [cobord_fgl_additive, cobord_fgl_multiplicative] {
                let mut law = ptr::null_mut();
                assert_eq!(make(5, &mut law), CobordStatus::Ok);
                assert_eq!(cobord_fgl_cap(law), 5);
                cobord_fgl_free(law);
            }
        }
    }

    #[test]
    fn errors_are_reported() {
        unsafe {
            let mut law = ptr::null_mut();
            assert_eq!(cobord_fgl_universal(99, &mut law), CobordStatus::InvalidArgument);
            assert!(last_error().contains("99"));
            assert!(law.is_null());
            assert_eq!(cobord_fgl_universal(2, ptr::null_mut()), CobordStatus::NullPointer);
            let mut json = ptr::null_mut();
            assert_eq!(cobord_fgl_to_json(ptr::null(), &mut json), CobordStatus::NullPointer);
            assert_eq!(cobord_hrr(50, 1, &mut json), CobordStatus::InvalidArgument);
            assert!(last_error().contains("out of range"));
            assert_eq!(cobord_hrr(2, 2, &mut json), CobordStatus::Ok);
            assert!(cobord_last_error_message().is_null());
            cobord_string_free(json);
            assert_eq!(cobord_fgl_cap(ptr::null()), 0);
            cobord_fgl_free(ptr::null_mut());
            cobord_string_free(ptr::null_mut());
        }
    }

    #[test]
    fn hrr_json() {
        unsafe {
            let mut json = ptr::null_mut();
            assert_eq!(cobord_hrr(3, 2, &mut json), CobordStatus::Ok);
            let v: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
            assert_eq!(v["binomial"], "10");
            assert_eq!(v["agree"], true);
        }
    }

    #[test]
    fn bivariant_checks() {
        unsafe {
            let budget = CobordBudget {
                exhaustive_size: 2,
                trials: 50,
                ..cobord_budget_default()
            };
            let mut json = ptr::null_mut();
            let status = cobord_bivariant_check(c"a12".as_ptr(), budget, CobordEngine::Universal, &mut json);
            assert_eq!(status, CobordStatus::Ok);
            let v: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
            assert_eq!(v[0]["passed"], true);

            let status = cobord_bivariant_check(c"a12".as_ptr(), budget, CobordEngine::SkippedPullback, &mut json);
            assert_eq!(status, CobordStatus::Violation);
            let v: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
            assert!(v[0]["counterexample"]["diagram"]["maps"].is_object());

            let status = cobord_bivariant_check(c"nope".as_ptr(), budget, CobordEngine::Universal, &mut json);
            assert_eq!(status, CobordStatus::InvalidArgument);
            assert!(last_error().contains("nope"));
        }
    }
}
