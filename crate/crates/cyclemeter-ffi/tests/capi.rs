//! Exercises the C ABI exactly as a foreign caller would: through raw
//! pointers and status codes.

use std::ffi::{CStr, CString};
use std::ptr;

use cyclemeter_ffi::*;

fn parse_model(spec: &str) -> *mut CmModel {
    let c = CString::new(spec).unwrap();
    let mut out: *mut CmModel = ptr::null_mut();
    let st = unsafe { cm_model_parse(c.as_ptr(), &mut out) };
    assert_eq!(st, CmStatus::Ok);
    assert!(!out.is_null());
    out
}

#[test]
fn version_is_exposed() {
    let v = unsafe { CStr::from_ptr(cm_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn model_parse_and_htable() {
    let model = parse_model("ewens:2");
    let mut table: *mut CmHTable = ptr::null_mut();
    unsafe {
        assert_eq!(cm_htable_build(model, 3, &mut table), CmStatus::Ok);
        assert_eq!(cm_htable_limit(table), 3);
        let mut v = 0.0f64;
        assert_eq!(cm_htable_log_h(table, 3, &mut v), CmStatus::Ok);
        assert!((v - 4f64.ln()).abs() < 1e-13);
        assert_eq!(cm_htable_log_h(table, 4, &mut v), CmStatus::RangeError);
        cm_htable_free(table);
        cm_model_free(model);
    }
}

#[test]
fn parse_error_sets_message() {
    let c = CString::new("nosuch:3").unwrap();
    let mut out: *mut CmModel = ptr::null_mut();
    let st = unsafe { cm_model_parse(c.as_ptr(), &mut out) };
    assert_eq!(st, CmStatus::ParseError);
    let msg = unsafe { CStr::from_ptr(cm_last_error_message()) }
        .to_str()
        .unwrap();
    assert!(msg.contains("nosuch"), "message: {msg}");
}

#[test]
fn null_pointers_are_rejected() {
    let mut out: *mut CmModel = ptr::null_mut();
    assert_eq!(
        unsafe { cm_model_parse(ptr::null(), &mut out) },
        CmStatus::NullPointer
    );
    let mut v = 0.0f64;
    assert_eq!(
        unsafe { cm_htable_log_h(ptr::null(), 0, &mut v) },
        CmStatus::NullPointer
    );
}

#[test]
fn mangoldt_psi_and_lambda() {
    let mut t: *mut CmMangoldt = ptr::null_mut();
    unsafe {
        assert_eq!(cm_mangoldt_build(10, &mut t), CmStatus::Ok);
        let mut v = 0.0f64;
        assert_eq!(cm_mangoldt_psi(t, 10, &mut v), CmStatus::Ok);
        assert!((v - 2520f64.ln()).abs() < 1e-12);
        assert_eq!(cm_mangoldt_lambda(t, 9, &mut v), CmStatus::Ok);
        assert!((v - 3f64.ln()).abs() < 1e-15);
        assert_eq!(cm_mangoldt_psi(t, 11, &mut v), CmStatus::RangeError);
        assert_eq!(cm_mangoldt_build(0, &mut t), CmStatus::CapacityError);
        cm_mangoldt_free(t);
    }
}

#[test]
fn expectations_match_library_values() {
    let model = parse_model("uniform");
    let mut table: *mut CmHTable = ptr::null_mut();
    let mut mang: *mut CmMangoldt = ptr::null_mut();
    unsafe {
        assert_eq!(cm_htable_build(model, 4, &mut table), CmStatus::Ok);
        assert_eq!(cm_mangoldt_build(4, &mut mang), CmStatus::Ok);

        let mut y3 = 0.0f64;
        assert_eq!(
            cm_expect_log_y(table, 3, CmTruncation::Full, 0, &mut y3),
            CmStatus::Ok
        );
        assert!((y3 - 0.7127776865026759).abs() < 1e-13);

        let mut o4 = 0.0f64;
        assert_eq!(
            cm_expect_log_o(table, mang, 4, CmTruncation::Full, 0, &mut o4),
            CmStatus::Ok
        );
        let mut y4 = 0.0f64;
        assert_eq!(
            cm_expect_log_y(table, 4, CmTruncation::Full, 0, &mut y4),
            CmStatus::Ok
        );
        assert!((y4 - o4 - 2f64.ln() / 8.0).abs() < 1e-12);

        let mut e = 0.0f64;
        assert_eq!(
            cm_expect_dnk(table, 4, 2, CmTruncation::Full, 0, &mut e),
            CmStatus::Ok
        );
        assert!((e - 0.75).abs() < 1e-12); // 1/2 + 1/4

        let mut p0 = 0.0f64;
        assert_eq!(
            cm_p_dnk_zero(table, 4, 5, CmTruncation::Full, 0, &mut p0),
            CmStatus::Ok
        );
        assert_eq!(p0, 1.0);

        let (mut re, mut im) = (0.0f64, 0.0f64);
        assert_eq!(
            cm_mgf_log_y(table, 3, 1.0, 0.0, CmTruncation::Full, 0, &mut re, &mut im),
            CmStatus::Ok
        );
        assert!((re - 13.0 / 6.0).abs() < 1e-12);
        assert_eq!(im, 0.0);

        cm_mangoldt_free(mang);
        cm_htable_free(table);
        cm_model_free(model);
    }
}

#[test]
fn zeros_and_explicit_formula() {
    let mut z: *mut CmZeros = ptr::null_mut();
    unsafe {
        assert_eq!(cm_zeros_bundled(&mut z), CmStatus::Ok);
        assert_eq!(cm_zeros_count(z), 100);
        let (mut v, mut resid) = (0.0f64, 0.0f64);
        assert_eq!(cm_psi_explicit(z, 1000.0, &mut v, &mut resid), CmStatus::Ok);
        // the plain 100-zero truncation sits a few units under the sieve value
        assert!((v - 996.68).abs() < 5.0, "explicit = {v}");
        assert!(resid < 1e-10);
        assert_eq!(
            cm_psi_explicit(z, 1.0, &mut v, &mut resid),
            CmStatus::DomainError
        );
        cm_zeros_free(z);
    }
}

#[test]
fn rate_function_and_standardization() {
    unsafe {
        let mut f = 0.0f64;
        assert_eq!(cm_rate_function_ge(1.0, 0.5, 1, &mut f), CmStatus::Ok);
        assert!(f.abs() < 1e-8);
        assert_eq!(cm_rate_function_poly(1.0, 0.5, &mut f), CmStatus::Ok);
        assert!(f.is_finite());

        let (mut p, mut scale) = (0.0f64, 0.0f64);
        assert_eq!(
            cm_precise_dev_ge(3.0, 1.0, 1_000_000, &mut p, &mut scale),
            CmStatus::Ok
        );
        assert!(p > 0.0 && scale > 0.0);

        let mut s = 0.0f64;
        let ln_n = 1000f64.ln();
        let center = 0.5 * ln_n * ln_n;
        assert_eq!(
            cm_erdos_turan_standardize(center, 1000, 1.0, &mut s),
            CmStatus::Ok
        );
        assert!(s.abs() < 1e-12);
    }
}

#[test]
fn monte_carlo_is_worker_independent() {
    let model = parse_model("poly:0.5");
    let mut table: *mut CmHTable = ptr::null_mut();
    let mut mang: *mut CmMangoldt = ptr::null_mut();
    unsafe {
        assert_eq!(cm_htable_build(model, 50, &mut table), CmStatus::Ok);
        assert_eq!(cm_mangoldt_build(50, &mut mang), CmStatus::Ok);
        let mut a = CmSampleStats {
            count: 0,
            mean: 0.0,
            variance: 0.0,
            se: 0.0,
            min: 0.0,
            max: 0.0,
        };
        let mut b = a;
        assert_eq!(
            cm_monte_carlo(table, mang, CmFunctional::LogO, 0, 50, 4000, 9, 1, &mut a),
            CmStatus::Ok
        );
        assert_eq!(
            cm_monte_carlo(table, mang, CmFunctional::LogO, 0, 50, 4000, 9, 4, &mut b),
            CmStatus::Ok
        );
        assert_eq!(a, b);
        assert_eq!(a.count, 4000);
        assert!(a.variance > 0.0 && a.se > 0.0 && a.min <= a.mean && a.mean <= a.max);

        // functionals that need the sieve reject a missing table
        let st = cm_monte_carlo(
            table,
            ptr::null(),
            CmFunctional::Delta,
            0,
            50,
            10,
            0,
            1,
            &mut a,
        );
        assert_eq!(st, CmStatus::DomainError);

        cm_mangoldt_free(mang);
        cm_htable_free(table);
        cm_model_free(model);
    }
}

#[test]
fn header_exists_with_expected_symbols() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/cyclemeter.h");
    let text = std::fs::read_to_string(header).expect("generated header");
    for symbol in [
        "cm_model_parse",
        "cm_htable_build",
        "cm_expect_log_o",
        "cm_monte_carlo",
        "cm_psi_explicit",
        "CmStatus",
        "CmSampleStats",
    ] {
        assert!(text.contains(symbol), "header lacks {symbol}");
    }
}
