//! C ABI over `heis-core`.
//!
//! Every fallible entry point returns a [`HeisStatus`]; on failure the message is
//! available from [`heis_last_error`] on the same thread. Maps are opaque handles
//! created by [`heis_map_parse`] and released with [`heis_map_free`]. Strings
//! returned by the library are released with [`heis_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use heis_core::cli::{parse_map, ParsedMap};
use heis_core::exact::ledger_run;
use heis_core::group::{group_inv, group_mul, koranyi_norm, Point};
use heis_core::horizontal::assess_contact;
use heis_core::schwarzian::{preschwarzian, s_cl, s_cr};
use heis_core::{Error, TAU_ABS, TAU_REL};
use num_complex::Complex64;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeisStatus {
    Ok = 0,
    NullPointer = 1,
    Parse = 2,
    Domain = 3,
    Singular = 4,
    NotContact = 5,
    NotPositive = 6,
    Internal = 7,
    Panic = 8,
}

/// Opaque parsed map.
pub struct HeisMap {
    inner: ParsedMap,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeisPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeisComplex {
    pub re: f64,
    pub im: f64,
}

/// Pointwise contact data; `mu_defined` is 0 where `ZF = 0`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeisContact {
    pub image: HeisPoint,
    pub lambda: f64,
    pub r1: f64,
    pub r2: f64,
    pub r_z: HeisComplex,
    pub zf: HeisComplex,
    pub zbar_f: HeisComplex,
    pub mu: HeisComplex,
    pub mu_defined: i32,
    pub distortion: f64,
    pub orientation: i32,
    pub is_contact: i32,
    pub is_conformal: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> HeisStatus {
    match e {
        Error::Parse { .. } | Error::Shape(_) | Error::BadPotential(_) | Error::NotHarmonic(_) => HeisStatus::Parse,
        Error::Domain { .. } => HeisStatus::Domain,
        Error::Singular(_) => HeisStatus::Singular,
        Error::NotContact { .. } => HeisStatus::NotContact,
        Error::NotPositive { .. } => HeisStatus::NotPositive,
        _ => HeisStatus::Internal,
    }
}

/// Runs `f`, recording errors and panics; clears the last error on success.
fn guard(f: impl FnOnce() -> Result<(), (HeisStatus, String)>) -> HeisStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            HeisStatus::Ok
        }
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("panic inside heis-ffi");
            HeisStatus::Panic
        }
    }
}

fn core_err(e: Error) -> (HeisStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (HeisStatus, String) {
    (HeisStatus::NullPointer, format!("null pointer: {what}"))
}

impl From<HeisPoint> for Point {
    fn from(p: HeisPoint) -> Self {
        Point::new(p.x, p.y, p.t)
    }
}

impl From<Point> for HeisPoint {
    fn from(p: Point) -> Self {
        HeisPoint { x: p.x, y: p.y, t: p.t }
    }
}

impl From<Complex64> for HeisComplex {
    fn from(c: Complex64) -> Self {
        HeisComplex { re: c.re, im: c.im }
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn heis_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a map spec such as `inv∘tr(1,0,0)` or `flow(h=exp(x),s=0.5)`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn heis_map_parse(spec: *const c_char, out: *mut *mut HeisMap) -> HeisStatus {
    guard(|| {
        if spec.is_null() {
            return Err(null("spec"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let s = CStr::from_ptr(spec)
            .to_str()
            .map_err(|_| (HeisStatus::Parse, "spec is not UTF-8".to_string()))?;
        let inner = parse_map(s).map_err(core_err)?;
        *out = Box::into_raw(Box::new(HeisMap { inner }));
        Ok(())
    })
}

/// Releases a handle from [`heis_map_parse`]; null is ignored.
///
/// # Safety
/// `map` must come from [`heis_map_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn heis_map_free(map: *mut HeisMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// 1 when contact of the map is guaranteed by construction, 0 otherwise
/// (an `expr(...)` or `grad(...)` segment is present), -1 for null.
///
/// # Safety
/// `map` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn heis_map_contact_assumed(map: *const HeisMap) -> i32 {
    match map.as_ref() {
        Some(m) => m.inner.contact_assumed as i32,
        None => -1,
    }
}

unsafe fn with_map<T>(
    map: *const HeisMap,
    out: *mut T,
    f: impl FnOnce(&ParsedMap) -> heis_core::Result<T>,
) -> HeisStatus {
    guard(|| {
        let m = map.as_ref().ok_or_else(|| null("map"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = f(&m.inner).map_err(core_err)?;
        Ok(())
    })
}

/// # Safety
/// `map` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn heis_map_apply(map: *const HeisMap, p: HeisPoint, out: *mut HeisPoint) -> HeisStatus {
    with_map(map, out, |m| m.map.apply(p.into()).map(Into::into))
}

/// CR Schwarzian at `p`; fails with `NotContact` off contact maps.
///
/// # Safety
/// `map` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn heis_s_cr(map: *const HeisMap, p: HeisPoint, out: *mut HeisComplex) -> HeisStatus {
    with_map(map, out, |m| s_cr(&m.map, p.into()).map(Into::into))
}

/// Classical-type Schwarzian at `p`.
///
/// # Safety
/// `map` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn heis_s_cl(map: *const HeisMap, p: HeisPoint, out: *mut HeisComplex) -> HeisStatus {
    with_map(map, out, |m| s_cl(&m.map, p.into()).map(Into::into))
}

/// Pre-Schwarzian `Pf = Z ln λ` at `p`.
///
/// # Safety
/// `map` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn heis_preschwarzian(map: *const HeisMap, p: HeisPoint, out: *mut HeisComplex) -> HeisStatus {
    with_map(map, out, |m| preschwarzian(&m.map, p.into()).map(Into::into))
}

/// # Safety
/// `map` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn heis_assess_contact(map: *const HeisMap, p: HeisPoint, out: *mut HeisContact) -> HeisStatus {
    with_map(map, out, |m| {
        let a = assess_contact(&m.map, p.into())?;
        Ok(HeisContact {
            image: a.image.into(),
            lambda: a.lambda,
            r1: a.r1,
            r2: a.r2,
            r_z: a.r_z.into(),
            zf: a.zf.into(),
            zbar_f: a.zbar_f.into(),
            mu: a.mu.unwrap_or_default().into(),
            mu_defined: a.mu.is_some() as i32,
            distortion: a.distortion,
            orientation: a.orientation,
            is_contact: a.is_contact(TAU_REL, TAU_ABS) as i32,
            is_conformal: a.is_conformal(TAU_REL, TAU_ABS) as i32,
        })
    })
}

#[no_mangle]
pub extern "C" fn heis_group_mul(p: HeisPoint, q: HeisPoint) -> HeisPoint {
    group_mul(p.into(), q.into()).into()
}

#[no_mangle]
pub extern "C" fn heis_group_inv(p: HeisPoint) -> HeisPoint {
    group_inv(p.into()).into()
}

#[no_mangle]
pub extern "C" fn heis_koranyi_norm(p: HeisPoint) -> f64 {
    koranyi_norm(p.into())
}

/// Runs the constants ledger and returns it as a JSON string; release with
/// [`heis_string_free`].
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn heis_ledger_json(out: *mut *mut c_char) -> HeisStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let entries = ledger_run().map_err(core_err)?;
        let text = serde_json::to_string(&serde_json::json!({"schema": 1, "entries": entries}))
            .map_err(|e| (HeisStatus::Internal, e.to_string()))?;
        *out = CString::new(text)
            .map_err(|e| (HeisStatus::Internal, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// Releases a string returned by the library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn heis_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn heis_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
