use std::ffi::{c_char, CString};
use std::ptr;

use hb_ffi::*;

fn last_error() -> String {
    let n = unsafe { hb_last_error(ptr::null_mut(), 0) };
    let mut buf = vec![0u8; n + 1];
    unsafe { hb_last_error(buf.as_mut_ptr().cast::<c_char>(), buf.len()) };
    String::from_utf8(buf[..n].to_vec()).unwrap()
}

fn table(json: &str) -> (i32, *mut HbTable) {
    let s = CString::new(json).unwrap();
    let mut t = ptr::null_mut();
    let code = unsafe { hb_table_from_json(s.as_ptr(), &mut t) };
    (code, t)
}

#[test]
fn disc_map_and_inverse() {
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { hb_table_disc(&mut d) }, HB_OK);
    let (mut q, mut p) = (0.0, 0.0);
    assert_eq!(unsafe { hb_forward_map(d, 0.1, 0.5, &mut q, &mut p) }, HB_OK);
    assert!((q - (0.1 + 0.5f64.acos() / std::f64::consts::PI)).abs() < 1e-12);
    assert!((p - 0.5).abs() < 1e-12);
    let (mut q0, mut p0) = (0.0, 0.0);
    assert_eq!(unsafe { hb_inverse_map(d, q, p, &mut q0, &mut p0) }, HB_OK);
    assert!((q0 - 0.1).abs() < 1e-12 && (p0 - 0.5).abs() < 1e-12);
    let mut c = 0.0;
    assert_eq!(unsafe { hb_chord_length(d, 0.0, 0.5, &mut c) }, HB_OK);
    assert!((c - 1.0 / std::f64::consts::PI).abs() < 1e-12);
    unsafe { hb_table_free(d) };
}

#[test]
fn error_codes_and_messages() {
    let (code, t) = table(r#"{"type":"fourier_support","c0":1,"cos":[0,0.4]}"#);
    assert_eq!(code, HB_ERR_TABLE);
    assert!(t.is_null());
    assert!(!last_error().is_empty());
    let (code, _) = table(r#"{"type":"fourier_support","c0":1,"cos":[0,"x"]}"#);
    assert_eq!(code, HB_ERR_INPUT);
    assert!(last_error().contains("cos[1]"));
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { hb_table_from_json(ptr::null(), &mut t) }, HB_ERR_NULL);
    let bad = [0xffu8, 0];
    assert_eq!(unsafe { hb_table_from_json(bad.as_ptr().cast(), &mut t) }, HB_ERR_UTF8);

    let mut d = ptr::null_mut();
    unsafe { hb_table_disc(&mut d) };
    let mut c = 0.0;
    assert_eq!(unsafe { hb_chord_length(d, 0.25, 0.25, &mut c) }, HB_ERR_DOMAIN);
    let (mut q, mut p) = (0.0, 0.0);
    assert_eq!(unsafe { hb_forward_map(d, 0.0, f64::NAN, &mut q, &mut p) }, HB_ERR_INPUT);
    assert_eq!(unsafe { hb_forward_map(ptr::null(), 0.0, 0.0, &mut q, &mut p) }, HB_ERR_NULL);
    unsafe { hb_table_free(d) };
    unsafe { hb_table_free(ptr::null_mut()) };
}

#[test]
fn truncated_error_buffer_is_terminated() {
    let (code, _) = table("not json");
    assert_eq!(code, HB_ERR_INPUT);
    let full = last_error();
    let mut buf = [0x7f as c_char; 5];
    let n = unsafe { hb_last_error(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(n, full.len());
    assert_eq!(buf[4], 0);
}

#[test]
fn c0_distance_of_translate() {
    let (code, a) = table(r#"{"type":"fourier_support","c0":1,"cos":[0,0.05]}"#);
    assert_eq!(code, HB_OK);
    let mut d = ptr::null_mut();
    unsafe { hb_table_disc(&mut d) };
    let mut x = -1.0;
    assert_eq!(unsafe { hb_c0_distance(a, a, &mut x) }, HB_OK);
    assert_eq!(x, 0.0);
    assert_eq!(unsafe { hb_c0_distance(a, d, &mut x) }, HB_OK);
    assert!(x > 0.0 && x < 0.05);
    unsafe {
        hb_table_free(a);
        hb_table_free(d);
    }
}

#[test]
fn hofer_certificate_of_translation_and_interpolation() {
    let mut cert = HbCertificate::default();
    for json in [
        r#"{"type":"translation","table":{"type":"disc"},"v":[0.1,0.0]}"#,
        r#"{"type":"support_interp","from":{"type":"disc"},"to":{"type":"fourier_support","c0":1,"cos":[0,0.05]}}"#,
    ] {
        let s = CString::new(json).unwrap();
        let mut path = ptr::null_mut();
        assert_eq!(unsafe { hb_path_from_json(s.as_ptr(), &mut path) }, HB_OK, "{}", last_error());
        assert_eq!(unsafe { hb_hofer_certificate(path, 9, 64, 31, 256, &mut cert) }, HB_OK);
        assert_eq!(cert.pass, 1);
        assert!(cert.l_h <= 4.0 * cert.l_b * 1.01);
        assert_eq!(unsafe { hb_hofer_certificate(path, 8, 64, 31, 256, &mut cert) }, HB_ERR_INPUT);
        unsafe { hb_path_free(path) };
    }
}
