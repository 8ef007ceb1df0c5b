//! C ABI over the orlicz toolkit.
//!
//! Every call returns an [`OrliczStatus`]; results go through out-pointers.
//! On failure the message is kept per thread and read back with
//! [`orlicz_last_error`]. Handles are opaque and owned by the caller, who
//! releases them with the matching `_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use orlicz::grid::luxemburg_norm_weighted;
use orlicz::matuszewska::profile;
use orlicz::sobolev::{build_an, SobolevConjugate};
use orlicz::{Interp, OrliczError, YoungFunction};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrliczStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Range = 3,
    Degenerate = 4,
    NotDelta2 = 5,
    Unsupported = 6,
    Config = 7,
    UnderResolved = 8,
    InvalidProfile = 9,
    Solver = 10,
    Io = 11,
    Panic = 12,
}

impl From<&OrliczError> for OrliczStatus {
    fn from(e: &OrliczError) -> Self {
        match e {
            OrliczError::Domain { .. } => OrliczStatus::Domain,
            OrliczError::Range { .. } => OrliczStatus::Range,
            OrliczError::Degenerate(_) => OrliczStatus::Degenerate,
            OrliczError::NotDelta2(_) => OrliczStatus::NotDelta2,
            OrliczError::Unsupported(_) => OrliczStatus::Unsupported,
            OrliczError::Config(_) => OrliczStatus::Config,
            OrliczError::UnderResolved(_) => OrliczStatus::UnderResolved,
            OrliczError::InvalidProfile(_) => OrliczStatus::InvalidProfile,
            OrliczError::Solver(_) => OrliczStatus::Solver,
            OrliczError::Io(_) => OrliczStatus::Io,
        }
    }
}

/// Young function handle.
pub struct OrliczYoung(YoungFunction);

/// Sobolev conjugate handle.
pub struct OrliczSobolev(SobolevConjugate);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, mapping errors and panics to a status and recording the message.
fn guard(f: impl FnOnce() -> Result<(), OrliczStatus>) -> OrliczStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OrliczStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            OrliczStatus::Panic
        }
    }
}

fn fail(e: OrliczError) -> OrliczStatus {
    let s = OrliczStatus::from(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> OrliczStatus {
    set_error(format!("{what} is NULL"));
    OrliczStatus::NullPointer
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, OrliczStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, v: T, what: &str) -> Result<(), OrliczStatus> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], OrliczStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn new_young(r: orlicz::Result<YoungFunction>, out: *mut *mut OrliczYoung) -> Result<(), OrliczStatus> {
    if out.is_null() {
        return Err(null("out"));
    }
    let y = r.map_err(fail)?;
    out.write(Box::into_raw(Box::new(OrliczYoung(y))));
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn orlicz_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn orlicz_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// A(t) = t^p.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn orlicz_young_power(p: f64, out: *mut *mut OrliczYoung) -> OrliczStatus {
    guard(|| new_young(YoungFunction::power(p), out))
}

/// A(t) = t^p log(1+t)^q.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn orlicz_young_power_log(p: f64, q: f64, out: *mut *mut OrliczYoung) -> OrliczStatus {
    guard(|| new_young(YoungFunction::power_log(p, q), out))
}

/// Young function from `len` density samples (t_i, a(t_i)); `linear`
/// interpolates a linearly, otherwise a is piecewise constant.
///
/// # Safety
/// `t` and `a` must point to `len` doubles, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn orlicz_young_table(
    t: *const f64,
    a: *const f64,
    len: usize,
    linear: bool,
    out: *mut *mut OrliczYoung,
) -> OrliczStatus {
    guard(|| {
        let t = slice(t, len, "t")?;
        let a = slice(a, len, "a")?;
        let interp = if linear { Interp::Linear } else { Interp::Step };
        new_young(YoungFunction::from_samples(t, a, interp), out)
    })
}

/// The complementary function Ã as a new handle.
///
/// # Safety
/// `y` must be a live handle, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn orlicz_young_conjugate(y: *const OrliczYoung, out: *mut *mut OrliczYoung) -> OrliczStatus {
    guard(|| {
        let y = deref(y, "y")?;
        new_young(y.0.conjugate(), out)
    })
}

/// Releases a handle; NULL is ignored.
///
/// # Safety
/// `y` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn orlicz_young_free(y: *mut OrliczYoung) {
    if !y.is_null() {
        drop(Box::from_raw(y));
    }
}

unsafe fn scalar<H>(h: *const H, out: *mut f64, f: impl FnOnce(&H) -> orlicz::Result<f64>) -> OrliczStatus {
    guard(|| {
        let h = deref(h, "handle")?;
        let v = f(h).map_err(fail)?;
        write(out, v, "out")
    })
}

/// A(t).
///
/// # Safety
/// `y` must be live, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn orlicz_young_eval(y: *const OrliczYoung, x: f64, out: *mut f64) -> OrliczStatus {
    scalar(y, out, |y| y.0.eval(x))
}

/// a(t), the right derivative of A.
///
/// # Safety
/// `y` must be live, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn orlicz_young_density(y: *const OrliczYoung, x: f64, out: *mut f64) -> OrliczStatus {
    scalar(y, out, |y| y.0.density(x))
}

/// A⁻¹(s).
///
/// # Safety
/// `y` must be live, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn orlicz_young_inverse(y: *const OrliczYoung, x: f64, out: *mut f64) -> OrliczStatus {
    scalar(y, out, |y| y.0.inverse(x))
}

/// H(t) of the Sobolev conjugate.
///
/// # Safety
/// `s` must be live, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn orlicz_sobolev_h(s: *const OrliczSobolev, x: f64, out: *mut f64) -> OrliczStatus {
    scalar(s, out, |s| s.0.h(x))
}

/// H⁻¹(s).
///
/// # Safety
/// `s` must be live, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn orlicz_sobolev_h_inverse(s: *const OrliczSobolev, x: f64, out: *mut f64) -> OrliczStatus {
    scalar(s, out, |s| s.0.h_inverse(x))
}

/// A_n(s) = A(H⁻¹(s)).
///
/// # Safety
/// `s` must be live, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn orlicz_sobolev_eval(s: *const OrliczSobolev, x: f64, out: *mut f64) -> OrliczStatus {
    scalar(s, out, |s| s.0.an_eval(x))
}

/// a_n(s).
///
/// # Safety
/// `s` must be live, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn orlicz_sobolev_density(s: *const OrliczSobolev, x: f64, out: *mut f64) -> OrliczStatus {
    scalar(s, out, |s| s.0.an_density(x))
}

/// Growth indices p⁻ ≤ t a(t)/A(t) ≤ p⁺.
///
/// # Safety
/// `y` must be live, `p_minus` and `p_plus` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn orlicz_young_indices(
    y: *const OrliczYoung,
    p_minus: *mut f64,
    p_plus: *mut f64,
) -> OrliczStatus {
    guard(|| {
        let y = deref(y, "y")?;
        if p_minus.is_null() || p_plus.is_null() {
            return Err(null("p_minus/p_plus"));
        }
        let idx = y.0.growth_indices().map_err(fail)?;
        p_minus.write(idx.p_minus);
        p_plus.write(idx.p_plus);
        Ok(())
    })
}

/// Matuszewska index p_∞ of A.
///
/// # Safety
/// `y` must be live, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn orlicz_young_matuszewska_index(y: *const OrliczYoung, out: *mut f64) -> OrliczStatus {
    guard(|| {
        let y = deref(y, "y")?;
        let p = profile(&y.0).map_err(fail)?;
        write(out, p.p_infinity(), "out")
    })
}

/// Luxemburg norm of the step function taking `values[i]` on a set of
/// measure `weights[i]`.
///
/// # Safety
/// `values` and `weights` must point to `len` doubles, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn orlicz_luxemburg_norm(
    y: *const OrliczYoung,
    values: *const f64,
    weights: *const f64,
    len: usize,
    out: *mut f64,
) -> OrliczStatus {
    guard(|| {
        let y = deref(y, "y")?;
        let v = slice(values, len, "values")?;
        let w = slice(weights, len, "weights")?;
        let n = luxemburg_norm_weighted(&y.0, v, w).map_err(fail)?;
        write(out, n, "out")
    })
}

/// Sobolev conjugate A_n of `y` in dimension `n`; needs p⁺ < n.
///
/// # Safety
/// `y` must be live, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn orlicz_sobolev_new(y: *const OrliczYoung, n: usize, out: *mut *mut OrliczSobolev) -> OrliczStatus {
    guard(|| {
        let y = deref(y, "y")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = build_an(&y.0, n).map_err(fail)?;
        out.write(Box::into_raw(Box::new(OrliczSobolev(s))));
        Ok(())
    })
}

/// Releases a handle; NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn orlicz_sobolev_free(s: *mut OrliczSobolev) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}
