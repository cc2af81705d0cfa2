//! C ABI over the `liquid-drop` crate.
//!
//! Bodies are opaque `LdBody` handles created by the `ld_body_*`
//! constructors and released with [`ld_body_free`]. Every fallible function
//! returns an [`LdStatus`] and writes its result through an out-pointer; on
//! failure a message is available from [`ld_last_error`] on the same thread.
//! Strings returned through out-pointers are owned by the caller and must be
//! released with [`ld_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use liquid_drop::energy::{ball_profile, boundary_interaction, coulomb_energy, splitting_threshold, total_energy};
use liquid_drop::proofcheck::{self, ScalarChainReport};
use liquid_drop::shapes::{off, Mesh, StarShape};
use liquid_drop::variation::stationarity_residual;
use liquid_drop::{Body, Error, Estimate, Vec3};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidBody = 3,
    Domain = 4,
    RadialDegeneracy = 5,
    RayExit = 6,
    Io = 7,
    Parse = 8,
    Panic = 9,
}

/// Opaque body handle.
pub struct LdBody(Body);

/// Value with its standard error; `samples` is 0 for closed forms.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
}

impl From<Estimate> for LdEstimate {
    fn from(e: Estimate) -> Self {
        Self {
            value: e.value,
            std_error: e.std_error,
            samples: e.samples as u64,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LdStatus {
    match e {
        Error::InvalidBody(_) | Error::DegenerateVertex(_) => LdStatus::InvalidBody,
        Error::Domain(_) | Error::ExteriorOrigin => LdStatus::Domain,
        Error::RadialDegeneracy(_) => LdStatus::RadialDegeneracy,
        Error::RayExit(_) => LdStatus::RayExit,
        Error::Io(_) => LdStatus::Io,
        Error::Parse(_) | Error::Json(_) | Error::Csv(_) => LdStatus::Parse,
    }
}

/// Failure raised inside the wrapper before reaching the library.
struct Fail(LdStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> LdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LdStatus::Ok,
        Ok(Err(Fail(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            LdStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(LdStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn body_ref<'a>(body: *const LdBody) -> Result<&'a Body, Fail> {
    body.as_ref().map(|b| &b.0).ok_or_else(|| null("body"))
}

unsafe fn text<'a>(s: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Fail(LdStatus::InvalidArgument, format!("`{name}` is not UTF-8")))
}

unsafe fn vec3(p: *const f64, name: &str) -> Result<Vec3, Fail> {
    if p.is_null() {
        return Err(null(name));
    }
    let s = std::slice::from_raw_parts(p, 3);
    Ok(Vec3::new(s[0], s[1], s[2]))
}

unsafe fn emit_body(out: *mut *mut LdBody, body: liquid_drop::Result<Body>) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(ptr::null_mut());
    let handle = Box::into_raw(Box::new(LdBody(body?)));
    out.write(handle);
    Ok(())
}

unsafe fn emit_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    let c = CString::new(s).map_err(|_| Fail(LdStatus::Parse, "string contains NUL".into()))?;
    out.write(c.into_raw());
    Ok(())
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String, Fail> {
    serde_json::to_string(v).map_err(|e| Fail(LdStatus::Parse, e.to_string()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ld_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library from this thread.
#[no_mangle]
pub extern "C" fn ld_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ld_body_ball(radius: f64, out: *mut *mut LdBody) -> LdStatus {
    guard(|| emit_body(out, Body::ball(radius)))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ld_body_ellipsoid(a: f64, b: f64, c: f64, out: *mut *mut LdBody) -> LdStatus {
    guard(|| emit_body(out, Body::ellipsoid(a, b, c)))
}

/// Two disjoint balls with centres `separation` apart.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ld_body_two_balls(r1: f64, r2: f64, separation: f64, out: *mut *mut LdBody) -> LdStatus {
    guard(|| emit_body(out, Body::two_balls(r1, r2, separation)))
}

/// Cube mesh of side `side` centred at the origin.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ld_body_cube(side: f64, subdivisions: usize, out: *mut *mut LdBody) -> LdStatus {
    guard(|| emit_body(out, Mesh::cube(Vec3::zeros(), side, subdivisions).map(Body::Mesh)))
}

/// Closed triangle mesh read from an OFF file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ld_body_from_off(path: *const c_char, out: *mut *mut LdBody) -> LdStatus {
    guard(|| {
        let path = text(path, "path")?;
        emit_body(out, off::read_off(Path::new(path)).map(Body::Mesh))
    })
}

/// Star shape from a StarShape JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ld_body_from_star_json(json: *const c_char, out: *mut *mut LdBody) -> LdStatus {
    guard(|| {
        let json = text(json, "json")?;
        emit_body(out, StarShape::from_json(json).map(Body::StarShape))
    })
}

/// Releases a body. NULL is ignored.
///
/// # Safety
/// `body` must come from an `ld_body_*` constructor and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ld_body_free(body: *mut LdBody) {
    if !body.is_null() {
        drop(Box::from_raw(body));
    }
}

/// # Safety
/// `body` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ld_body_volume(body: *const LdBody, out: *mut LdEstimate) -> LdStatus {
    guard(|| write(out, body_ref(body)?.volume().into(), "out"))
}

/// # Safety
/// `body` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ld_body_perimeter(body: *const LdBody, out: *mut LdEstimate) -> LdStatus {
    guard(|| write(out, body_ref(body)?.perimeter().into(), "out"))
}

/// # Safety
/// `body` must be a live handle, `point` must hold 3 doubles and `out` be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ld_body_contains(body: *const LdBody, point: *const f64, out: *mut bool) -> LdStatus {
    guard(|| {
        let b = body_ref(body)?;
        write(out, b.contains(&vec3(point, "point")?), "out")
    })
}

/// Distance from the interior point `origin` to the boundary along `dir`.
///
/// # Safety
/// `body` must be a live handle, `origin` and `dir` must hold 3 doubles
/// each and `out` be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ld_body_ray_exit(
    body: *const LdBody,
    origin: *const f64,
    dir: *const f64,
    out: *mut f64,
) -> LdStatus {
    guard(|| {
        let b = body_ref(body)?;
        let d = vec3(dir, "dir")?;
        let n = d.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Fail(
                LdStatus::InvalidArgument,
                "`dir` must be a non-zero vector".into(),
            ));
        }
        let len = b.ray_exit_length(&vec3(origin, "origin")?, &(d / n))?;
        write(out, len, "out")
    })
}

/// Coulomb self-energy `½∬|x − y|⁻¹`.
///
/// # Safety
/// `body` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ld_coulomb_energy(
    body: *const LdBody,
    samples: usize,
    seed: u64,
    out: *mut LdEstimate,
) -> LdStatus {
    guard(|| write(out, coulomb_energy(body_ref(body)?, samples, seed).into(), "out"))
}

/// Boundary interaction energy `∫_{∂Ω} v_Ω`.
///
/// # Safety
/// `body` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ld_boundary_interaction(
    body: *const LdBody,
    samples: usize,
    seed: u64,
    out: *mut LdEstimate,
) -> LdStatus {
    guard(|| write(out, boundary_interaction(body_ref(body)?, samples, seed).into(), "out"))
}

/// Full energy report as JSON.
///
/// # Safety
/// `body` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ld_energy_report_json(
    body: *const LdBody,
    samples: usize,
    seed: u64,
    out: *mut *mut c_char,
) -> LdStatus {
    guard(|| {
        let report = total_energy(body_ref(body)?, samples, seed);
        emit_string(out, to_json(&report)?)
    })
}

/// Stationarity report as JSON.
///
/// # Safety
/// `body` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ld_stationarity_json(
    body: *const LdBody,
    samples: usize,
    seed: u64,
    out: *mut *mut c_char,
) -> LdStatus {
    guard(|| {
        let report = stationarity_residual(body_ref(body)?, samples, seed)?;
        emit_string(out, to_json(&report)?)
    })
}

/// Runs one scalar chain (`outer-min`, `roundness`, `binding` or
/// `two-ball`) at `volume`, writing the report as JSON and its verdict.
///
/// # Safety
/// `chain` must be a NUL-terminated string; `out` and `verdict` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ld_proofcheck_json(
    chain: *const c_char,
    volume: f64,
    out: *mut *mut c_char,
    verdict: *mut bool,
) -> LdStatus {
    guard(|| {
        let report: ScalarChainReport = match text(chain, "chain")? {
            "outer-min" => proofcheck::outer_min_chain(volume)?,
            "roundness" => proofcheck::roundness_chain_for_volume(volume)?,
            "binding" => proofcheck::binding_energy_bounds(),
            "two-ball" => proofcheck::two_ball_comparison(volume)?,
            other => return Err(Fail(LdStatus::InvalidArgument, format!("unknown chain `{other}`"))),
        };
        write(verdict, report.verdict, "verdict")?;
        emit_string(out, to_json(&report)?)
    })
}

/// `4πR² + 16π²R⁵/15` for the ball of volume `volume`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ld_ball_profile(volume: f64, out: *mut f64) -> LdStatus {
    guard(|| write(out, ball_profile(volume)?, "out"))
}

/// Volume above which two balls of half the volume have less energy.
#[no_mangle]
pub extern "C" fn ld_splitting_threshold() -> f64 {
    splitting_threshold()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ld_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
