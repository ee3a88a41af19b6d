//! C ABI over `hb-core`.
//!
//! Tables and paths are opaque handles created by `hb_*_from_json` / `hb_table_disc` and
//! released with the matching `*_free`. Every fallible call returns an `HB_*` status code
//! and writes its results through out-pointers; on failure the message is available from
//! `hb_last_error` on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hb_core::billiard::{self, AnnulusPoint};
use hb_core::curves::{self, TableCurve};
use hb_core::homotopy::{verify_comparison, HoferOptions, LengthOptions, TablePath};
use hb_core::io::{parse_json, PathSpec, TableSpec};
use hb_core::Error;

pub const HB_OK: i32 = 0;
/// A required pointer argument was null.
pub const HB_ERR_NULL: i32 = 1;
/// A string argument was not valid UTF-8.
pub const HB_ERR_UTF8: i32 = 2;
/// Malformed JSON or spec, bad grid sizes or other unusable input.
pub const HB_ERR_INPUT: i32 = 3;
/// The table or path is not a valid strictly convex table.
pub const HB_ERR_TABLE: i32 = 4;
/// The point lies on the diagonal or too close to the boundary of the annulus.
pub const HB_ERR_DOMAIN: i32 = 5;
pub const HB_ERR_NO_CONVERGENCE: i32 = 6;
/// A computed bound or bracket failed.
pub const HB_ERR_CERTIFICATE: i32 = 7;
/// A Rust panic was caught at the boundary.
pub const HB_ERR_PANIC: i32 = 8;

/// A billiard table: a closed strictly convex curve of length 1.
pub struct HbTable(TableCurve);

/// A one-parameter family of tables over `s ∈ [0, 1]`.
pub struct HbPath(Box<dyn TablePath>);

/// Lengths of a path and the outcome of `l_H ≤ 4·l_B`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HbCertificate {
    /// Hofer length.
    pub l_h: f64,
    /// Geometric length.
    pub l_b: f64,
    /// `l_h / l_b`, infinite when `l_b = 0 < l_h`.
    pub ratio: f64,
    /// 1 when the inequality holds within the tolerance, else 0.
    pub pass: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut e = e.borrow_mut();
        e.clear();
        e.extend(msg.bytes().filter(|&b| b != 0));
    });
}

fn code_of(e: &Error) -> i32 {
    match e {
        Error::CurvatureNotPositive { .. }
        | Error::NotStrictlyConvex
        | Error::InvalidWidth { .. }
        | Error::MarkInCorner { .. }
        | Error::InvalidPolygon(_)
        | Error::PerturbationTooLarge(_)
        | Error::ProfilesNotOrdered { .. } => HB_ERR_TABLE,
        Error::DiagonalPoint { .. } | Error::NearGrazing { .. } => HB_ERR_DOMAIN,
        Error::NoConvergence(_) => HB_ERR_NO_CONVERGENCE,
        e if e.is_certificate_failure() => HB_ERR_CERTIFICATE,
        _ => HB_ERR_INPUT,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (i32, String)>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HB_OK,
        Ok(Err((code, msg))) => {
            set_error(&msg);
            code
        }
        Err(_) => {
            set_error("panic inside hb-core");
            HB_ERR_PANIC
        }
    }
}

fn core<T>(r: hb_core::Result<T>) -> Result<T, (i32, String)> {
    r.map_err(|e| (code_of(&e), e.to_string()))
}

unsafe fn non_null<'a, T>(p: *const T, name: &str) -> Result<&'a T, (i32, String)> {
    p.as_ref().ok_or_else(|| (HB_ERR_NULL, format!("{name} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, (i32, String)> {
    p.as_mut().ok_or_else(|| (HB_ERR_NULL, format!("{name} is null")))
}

unsafe fn string<'a>(s: *const c_char, name: &str) -> Result<&'a str, (i32, String)> {
    if s.is_null() {
        return Err((HB_ERR_NULL, format!("{name} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| (HB_ERR_UTF8, format!("{name}: {e}")))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated, truncated
/// to `len - 1` bytes) and returns the full message length without the terminator.
/// Passing a null `buf` only queries the length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn hb_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = e.len().min(len - 1);
            ptr::copy_nonoverlapping(e.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        e.len()
    })
}

/// The round table of length 1.
///
/// # Safety
/// `out` must be a valid pointer; the handle written there must be released with
/// `hb_table_free`.
#[no_mangle]
pub unsafe extern "C" fn hb_table_disc(out: *mut *mut HbTable) -> i32 {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = Box::into_raw(Box::new(HbTable(curves::disc_table())));
        Ok(())
    })
}

/// Builds a table from a JSON table spec such as `{"type":"fourier_support","c0":1,"cos":[0,0.1]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hb_table_from_json(json: *const c_char, out: *mut *mut HbTable) -> i32 {
    guard(|| {
        let text = string(json, "json")?;
        let out = out_ptr(out, "out")?;
        let spec: TableSpec = core(parse_json(text))?;
        *out = Box::into_raw(Box::new(HbTable(core(spec.build())?)));
        Ok(())
    })
}

/// # Safety
/// `t` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn hb_table_free(t: *mut HbTable) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

unsafe fn map_with(
    t: *const HbTable,
    q: f64,
    p: f64,
    out_q: *mut f64,
    out_p: *mut f64,
    f: fn(&TableCurve, AnnulusPoint) -> hb_core::Result<AnnulusPoint>,
) -> i32 {
    guard(|| {
        let t = non_null(t, "table")?;
        let (oq, op) = (out_ptr(out_q, "out_q")?, out_ptr(out_p, "out_p")?);
        if !(q.is_finite() && p.is_finite()) {
            return Err((HB_ERR_INPUT, format!("non-finite point ({q}, {p})")));
        }
        let y = core(f(&t.0, AnnulusPoint::new(q, p)))?;
        *oq = y.q;
        *op = y.p;
        Ok(())
    })
}

/// The billiard ball map `(q, p) ↦ (Q, P)`, with `q` the arc-length position in `[0, 1)`
/// and `p ∈ (-1, 1)` the tangential momentum.
///
/// # Safety
/// `t` must be a live handle; `out_q` and `out_p` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hb_forward_map(t: *const HbTable, q: f64, p: f64, out_q: *mut f64, out_p: *mut f64) -> i32 {
    map_with(t, q, p, out_q, out_p, billiard::forward_map)
}

/// Inverse of `hb_forward_map`.
///
/// # Safety
/// As for `hb_forward_map`.
#[no_mangle]
pub unsafe extern "C" fn hb_inverse_map(t: *const HbTable, q: f64, p: f64, out_q: *mut f64, out_p: *mut f64) -> i32 {
    map_with(t, q, p, out_q, out_p, billiard::inverse_map)
}

/// Euclidean distance between the boundary points at parameters `q` and `big_q`.
///
/// # Safety
/// `t` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hb_chord_length(t: *const HbTable, q: f64, big_q: f64, out: *mut f64) -> i32 {
    guard(|| {
        let t = non_null(t, "table")?;
        let out = out_ptr(out, "out")?;
        *out = core(billiard::chord_length(&t.0, q, big_q))?;
        Ok(())
    })
}

/// `sup_q |γ_a(q) - γ_b(q)|` over the common arc-length parameter.
///
/// # Safety
/// `a` and `b` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hb_c0_distance(a: *const HbTable, b: *const HbTable, out: *mut f64) -> i32 {
    guard(|| {
        let (a, b) = (non_null(a, "a")?, non_null(b, "b")?);
        *out_ptr(out, "out")? = curves::c0_distance(&a.0, &b.0);
        Ok(())
    })
}

/// Builds a path of tables from a JSON path spec such as
/// `{"type":"translation","table":{"type":"disc"},"v":[0.1,0]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hb_path_from_json(json: *const c_char, out: *mut *mut HbPath) -> i32 {
    guard(|| {
        let text = string(json, "json")?;
        let out = out_ptr(out, "out")?;
        let spec: PathSpec = core(parse_json(text))?;
        *out = Box::into_raw(Box::new(HbPath(core(spec.build())?)));
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn hb_path_free(p: *mut HbPath) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Hofer and geometric lengths of a path. `s_nodes` (odd, ≥ 3) is the number of Simpson
/// nodes in `s`; `q_grid` and `p_grid` size the Hofer oscillation grid and `length_q_grid`
/// the boundary grid of the geometric length. Zero selects the default for that grid.
///
/// # Safety
/// `path` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hb_hofer_certificate(
    path: *const HbPath,
    s_nodes: usize,
    q_grid: usize,
    p_grid: usize,
    length_q_grid: usize,
    out: *mut HbCertificate,
) -> i32 {
    guard(|| {
        let path = non_null(path, "path")?;
        let out = out_ptr(out, "out")?;
        let mut h = HoferOptions::default();
        let mut l = LengthOptions::default();
        if s_nodes != 0 {
            if s_nodes < 3 || s_nodes % 2 == 0 {
                return Err((HB_ERR_INPUT, format!("s_nodes must be odd and at least 3, got {s_nodes}")));
            }
            h.s_nodes = s_nodes;
            l.s_nodes = s_nodes;
        }
        for (v, slot) in [(q_grid, &mut h.q_grid), (p_grid, &mut h.p_grid), (length_q_grid, &mut l.q_grid)] {
            if v != 0 {
                *slot = v;
            }
        }
        let c = core(verify_comparison(path.0.as_ref(), &h, &l))?;
        *out = HbCertificate {
            l_h: c.l_h,
            l_b: c.l_b,
            ratio: c.ratio,
            pass: c.pass as i32,
        };
        Ok(())
    })
}
