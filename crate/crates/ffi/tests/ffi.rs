use std::ffi::{CStr, CString};
use std::ptr;

use gammak_ffi::*;

fn take(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let v = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { gammak_string_free(s) };
    v
}

fn last_error() -> Option<String> {
    let p = gammak_last_error();
    (!p.is_null()).then(|| take(p))
}

#[test]
fn gamma_handle_round_trip() {
    let mut g = ptr::null_mut();
    assert_eq!(
        unsafe { gammak_gamma_exact_new(3, &mut g) },
        GammakStatus::Ok
    );
    assert_eq!(unsafe { gammak_gamma_k(g) }, 3);

    let c = CString::new("1/2").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { gammak_gamma_eval(g, c.as_ptr(), &mut out) },
        GammakStatus::Ok
    );
    assert_eq!(take(out), "1/10321920");

    let mut x = 0.0;
    assert_eq!(
        unsafe { gammak_gamma_eval_f64(g, 5.0, &mut x) },
        GammakStatus::Ok
    );
    assert_eq!(x, 0.0);

    let mut js = ptr::null_mut();
    assert_eq!(
        unsafe { gammak_gamma_to_json(g, &mut js) },
        GammakStatus::Ok
    );
    let v: serde_json::Value = serde_json::from_str(&take(js)).unwrap();
    assert_eq!(v["k"], 3);
    assert_eq!(v["pieces"][0]["coeffs_scaled"][8], "1");

    unsafe { gammak_gamma_free(g) };
    unsafe { gammak_gamma_free(ptr::null_mut()) };
}

#[test]
fn error_codes() {
    let mut g = ptr::null_mut();
    assert_eq!(
        unsafe { gammak_gamma_exact_new(0, &mut g) },
        GammakStatus::InvalidArgument
    );
    assert!(last_error().unwrap().contains("k must lie"));
    assert_eq!(
        unsafe { gammak_gamma_exact_new(2, ptr::null_mut()) },
        GammakStatus::NullPointer
    );

    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { gammak_gamma_eval(ptr::null(), ptr::null(), &mut out) },
        GammakStatus::NullPointer
    );
    assert_eq!(
        unsafe { gammak_aliquot_i_d(2, 5, &mut out) },
        GammakStatus::InvalidArgument
    );

    // success clears the message
    assert_eq!(
        unsafe { gammak_toda_coeff(1, 2, &mut out) },
        GammakStatus::Ok
    );
    assert_eq!(take(out), "-1");
    assert!(last_error().is_none());
}

#[test]
fn numeric_entry_points() {
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { gammak_aliquot_i_d(2, 30, &mut out) },
        GammakStatus::Ok
    );
    assert!(take(out).starts_with("1.33333333333333333333333333"));

    assert_eq!(
        unsafe { gammak_toda_coeff(4, 3, &mut out) },
        GammakStatus::Ok
    );
    assert_eq!(take(out), "1/58800");

    let t = CString::new("1/2").unwrap();
    let mut pass = false;
    assert_eq!(
        unsafe { gammak_painleve_residual(2, t.as_ptr(), 40, &mut out, &mut pass) },
        GammakStatus::Ok
    );
    take(out);
    assert!(pass);

    let v = unsafe { CStr::from_ptr(gammak_version()) }
        .to_str()
        .unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_is_valid_c() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let header = std::fs::read_to_string(format!("{dir}/include/gammak.h")).unwrap();
    for name in [
        "gammak_gamma_exact_new",
        "gammak_string_free",
        "gammak_last_error",
        "GAMMAK_STATUS_PRECISION_FAILURE",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
    let Ok(status) = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(format!("{dir}/include/gammak.h"))
        .status()
    else {
        eprintln!("no C compiler; syntax check skipped");
        return;
    };
    assert!(status.success());
}
