//! C ABI over `gammak`.
//!
//! Every fallible call returns a [`GammakStatus`]; on failure the message is kept per thread
//! and can be fetched with [`gammak_last_error`]. Strings handed out by this library must be
//! released with [`gammak_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gammak::exactpoly::{gamma_exact, GammaPolySet};
use gammak::hp::{parse_rational, to_decimal, PrecisionContext};
use gammak::{aliquot, hankel, toda, Error};
use rug::Float;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammakStatus {
    Ok = 0,
    InvalidArgument = 1,
    PrecisionFailure = 2,
    NullPointer = 3,
    Internal = 4,
}

/// Opaque handle to an exact γ_k.
pub struct GammakGamma(GammaPolySet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GammakStatus {
    if e.is_precision_failure() {
        GammakStatus::PrecisionFailure
    } else if matches!(
        e,
        Error::InvalidArgument(_) | Error::KnotMismatch { .. } | Error::Infeasible { .. }
    ) {
        GammakStatus::InvalidArgument
    } else {
        GammakStatus::Internal
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> GammakStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GammakStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            GammakStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            GammakStatus::Internal
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Lib(Error::InvalidArgument(format!("{what} is not UTF-8"))))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    *out = CString::new(s).unwrap().into_raw();
    Ok(())
}

fn ctx(digits: u32) -> Result<PrecisionContext, Fail> {
    Ok(PrecisionContext::new(digits)?)
}

/// Message for the last failed call on this thread, or NULL. Free with [`gammak_string_free`].
#[no_mangle]
pub extern "C" fn gammak_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map_or(ptr::null_mut(), |c| c.clone().into_raw())
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gammak_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Compute γ_k exactly (1 <= k <= 7).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gammak_gamma_exact_new(
    k: u32,
    out: *mut *mut GammakGamma,
) -> GammakStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let g = gamma_exact(k)?;
        *out = Box::into_raw(Box::new(GammakGamma(g)));
        Ok(())
    })
}

/// # Safety
/// `g` must be NULL or a handle from [`gammak_gamma_exact_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gammak_gamma_free(g: *mut GammakGamma) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gammak_gamma_k(g: *const GammakGamma) -> u32 {
    g.as_ref().map_or(0, |g| g.0.k())
}

/// Exact γ_k(c) as a reduced fraction `"p/q"`; `c` is a decimal or fraction string.
///
/// # Safety
/// `g` must be a live handle, `c` a NUL-terminated string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gammak_gamma_eval(
    g: *const GammakGamma,
    c: *const c_char,
    out: *mut *mut c_char,
) -> GammakStatus {
    guard(|| {
        let g = g.as_ref().ok_or(Fail::Null("gamma handle"))?;
        let c = parse_rational(read_str(c, "c")?)?;
        let v = g.0.eval(&c)?;
        write_string(out, v.to_string())
    })
}

/// γ_k(c) rounded to a double.
///
/// # Safety
/// `g` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gammak_gamma_eval_f64(
    g: *const GammakGamma,
    c: f64,
    out: *mut f64,
) -> GammakStatus {
    guard(|| {
        let g = g.as_ref().ok_or(Fail::Null("gamma handle"))?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let c = rug::Rational::from_f64(c)
            .ok_or_else(|| Error::InvalidArgument("c must be finite".into()))?;
        *out = g.0.eval(&c)?.to_f64();
        Ok(())
    })
}

/// JSON `{k, pieces:[{interval, coeffs_scaled, scale}]}`.
///
/// # Safety
/// `g` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gammak_gamma_to_json(
    g: *const GammakGamma,
    out: *mut *mut c_char,
) -> GammakStatus {
    guard(|| {
        let g = g.as_ref().ok_or(Fail::Null("gamma handle"))?;
        let js = serde_json::to_string(&g.0.to_json()?)
            .map_err(|e| Fail::Lib(Error::InvalidArgument(e.to_string())))?;
        write_string(out, js)
    })
}

/// I(d) to `digits` significant digits, as a decimal string.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gammak_aliquot_i_d(
    d: u32,
    digits: u32,
    out: *mut *mut c_char,
) -> GammakStatus {
    guard(|| {
        let ctx = ctx(digits)?;
        let v = aliquot::i_d_poisson(d, &ctx)?;
        write_string(out, to_decimal(&v, digits))
    })
}

/// Taylor coefficient `c_m(k)` of `log D_k` as a fraction string.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gammak_toda_coeff(m: u32, k: u32, out: *mut *mut c_char) -> GammakStatus {
    guard(|| {
        let c = toda::c_coeff(m, k)?;
        write_string(out, c.to_string())
    })
}

/// Painlevé V residual of `H_k` at `t` (decimal or fraction string). Writes the residual as a
/// decimal string and whether it is within the scaled tolerance `10^-(digits-15)`.
///
/// # Safety
/// `t` must be a NUL-terminated string; `out_residual` and `out_pass` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn gammak_painleve_residual(
    k: u32,
    t: *const c_char,
    digits: u32,
    out_residual: *mut *mut c_char,
    out_pass: *mut bool,
) -> GammakStatus {
    guard(|| {
        if out_pass.is_null() {
            return Err(Fail::Null("out_pass"));
        }
        let ctx = ctx(digits)?;
        let q = parse_rational(read_str(t, "t")?)?;
        let tf = Float::with_val(ctx.bits(), &q);
        let r = hankel::painleve_residual(k, &tf, &ctx)?;
        write_string(out_residual, to_decimal(&r.residual, 6))?;
        *out_pass = r.pass();
        Ok(())
    })
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn gammak_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
