//! C ABI over `artbh-core`.
//!
//! Objects cross the boundary as opaque handles that the caller frees with the
//! matching `*_free`. Every fallible call returns an [`ArtbhStatus`]; the
//! message of the last failure on the calling thread is available from
//! [`artbh_last_error`]. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use artbh_core::config::RunConfig;
use artbh_core::curve::ClosedCurve;
use artbh_core::ergosphere::{find_ergosphere, kerr_verify};
use artbh_core::horizon::{choose_inner_curve, find_limit_cycle, FinderOptions, HoleKind, HorizonReport};
use artbh_core::metric::{draining_bathtub, kerr_cylindrical, FourierB, SpacetimeMetric};
use artbh_core::Error;

/// Result codes. `NoHorizon` is an expected outcome, not a failure.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArtbhStatus {
    Ok = 0,
    /// a required pointer was null
    NullArgument = 1,
    /// the input violates a precondition (bad geometry, bad parameter)
    Precondition = 2,
    /// numerical or I/O failure inside the library
    Internal = 3,
    /// a string argument was not valid UTF-8
    InvalidUtf8 = 4,
    /// output buffer too small; the message states the required length
    BufferTooSmall = 5,
    /// the finder established that there is no horizon
    NoHorizon = 6,
    /// the library panicked (a bug)
    Panic = 7,
}

/// Opaque metric handle.
pub struct ArtbhMetric(SpacetimeMetric);

/// Opaque closed-curve handle.
pub struct ArtbhCurve(ClosedCurve);

/// Opaque horizon handle.
pub struct ArtbhHorizon(HorizonReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> ArtbhStatus {
    set_error(e.to_string());
    if e.is_precondition() {
        ArtbhStatus::Precondition
    } else {
        ArtbhStatus::Internal
    }
}

/// Run `f`, converting panics into `Panic`.
fn guard(f: impl FnOnce() -> ArtbhStatus) -> ArtbhStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            ArtbhStatus::Panic
        }
    }
}

macro_rules! nonnull {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            set_error(concat!("null argument: ", stringify!($p)));
            return ArtbhStatus::NullArgument;
        })+
    };
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, ArtbhStatus> {
    CStr::from_ptr(p).to_str().map_err(|e| {
        set_error(format!("invalid UTF-8: {e}"));
        ArtbhStatus::InvalidUtf8
    })
}

unsafe fn emit<T>(out: *mut *mut T, v: T) -> ArtbhStatus {
    *out = Box::into_raw(Box::new(v));
    ArtbhStatus::Ok
}

/// Message of the last failure on this thread, or null. Valid until the next
/// call into the library from the same thread.
#[no_mangle]
pub extern "C" fn artbh_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn artbh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Build the `[metric]` of a TOML run configuration.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn artbh_metric_from_toml(toml: *const c_char, out: *mut *mut ArtbhMetric) -> ArtbhStatus {
    guard(|| {
        nonnull!(toml, out);
        let src = match str_arg(toml) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match RunConfig::from_toml(src).and_then(|c| c.metric.build()) {
            Ok(m) => emit(out, ArtbhMetric(m)),
            Err(e) => status_of(&e),
        }
    })
}

/// Draining bathtub `v = (A x + B y, A y − B x)/r²` with
/// `B(θ) = b0 + b1 cos θ + c1 sin θ`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn artbh_metric_bathtub(
    a: f64,
    b0: f64,
    b1: f64,
    c1: f64,
    out: *mut *mut ArtbhMetric,
) -> ArtbhStatus {
    guard(|| {
        nonnull!(out);
        if !(a.is_finite() && b0.is_finite() && b1.is_finite() && c1.is_finite()) {
            set_error("bathtub parameters must be finite");
            return ArtbhStatus::Precondition;
        }
        let b = FourierB { b0, b1, c1 };
        emit(out, ArtbhMetric(draining_bathtub(a, b)))
    })
}

/// Kerr in `(ρ, z, φ)` coordinates.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn artbh_metric_kerr_cyl(m: f64, a: f64, out: *mut *mut ArtbhMetric) -> ArtbhStatus {
    guard(|| {
        nonnull!(out);
        match kerr_cylindrical(m, a) {
            Ok(k) => emit(out, ArtbhMetric(k)),
            Err(e) => status_of(&e),
        }
    })
}

/// # Safety
/// `metric` must come from an `artbh_metric_*` constructor (or be null).
#[no_mangle]
pub unsafe extern "C" fn artbh_metric_free(metric: *mut ArtbhMetric) {
    if !metric.is_null() {
        drop(Box::from_raw(metric));
    }
}

/// Spatial dimension `n`, or 0 for a null handle.
///
/// # Safety
/// `metric` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn artbh_metric_dim(metric: *const ArtbhMetric) -> usize {
    metric.as_ref().map_or(0, |m| m.0.n())
}

/// Contravariant coefficients `g^{jk}(x)`, `j, k = 0..=n`, row-major into
/// `out` (`(n+1)²` doubles).
///
/// # Safety
/// `x` must hold `n` doubles and `out` `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn artbh_metric_g_up(
    metric: *const ArtbhMetric,
    x: *const f64,
    n: usize,
    out: *mut f64,
    out_len: usize,
) -> ArtbhStatus {
    guard(|| {
        nonnull!(metric, x, out);
        let m = &(*metric).0;
        if n != m.n() {
            set_error(format!("point has {n} coordinates, metric has n = {}", m.n()));
            return ArtbhStatus::Precondition;
        }
        let k = n + 1;
        if out_len < k * k {
            set_error(format!("need {} doubles", k * k));
            return ArtbhStatus::BufferTooSmall;
        }
        let xs = std::slice::from_raw_parts(x, n);
        match m.g_up(xs) {
            Ok(g) => {
                let o = std::slice::from_raw_parts_mut(out, k * k);
                for i in 0..k {
                    for j in 0..k {
                        o[i * k + j] = g[(i, j)];
                    }
                }
                ArtbhStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Ergosphere of a planar metric on a contour grid of spacing `h`.
///
/// # Safety
/// `metric` must be a live handle, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn artbh_find_ergosphere(
    metric: *const ArtbhMetric,
    h: f64,
    out: *mut *mut ArtbhCurve,
) -> ArtbhStatus {
    guard(|| {
        nonnull!(metric, out);
        match find_ergosphere(&(*metric).0, h) {
            Ok(c) => emit(out, ArtbhCurve(c)),
            Err(e) => status_of(&e),
        }
    })
}

/// Number of vertices, or 0 for a null handle.
///
/// # Safety
/// `curve` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn artbh_curve_len(curve: *const ArtbhCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.0.len())
}

/// Copy the vertices as interleaved `x1, x2` pairs (`2·len` doubles).
///
/// # Safety
/// `xy` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn artbh_curve_vertices(curve: *const ArtbhCurve, xy: *mut f64, cap: usize) -> ArtbhStatus {
    guard(|| {
        nonnull!(curve, xy);
        let c = &(*curve).0;
        if cap < 2 * c.len() {
            set_error(format!("need {} doubles", 2 * c.len()));
            return ArtbhStatus::BufferTooSmall;
        }
        let o = std::slice::from_raw_parts_mut(xy, 2 * c.len());
        for (k, v) in c.vertices.iter().enumerate() {
            o[2 * k] = v[0];
            o[2 * k + 1] = v[1];
        }
        ArtbhStatus::Ok
    })
}

/// # Safety
/// `curve` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn artbh_curve_free(curve: *mut ArtbhCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Limit-cycle horizon inside `ergosphere` with default finder options.
/// Returns `NoHorizon` (and no handle) when the finder shows there is none.
///
/// # Safety
/// Handles must be live, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn artbh_find_horizon(
    metric: *const ArtbhMetric,
    ergosphere: *const ArtbhCurve,
    out: *mut *mut ArtbhHorizon,
) -> ArtbhStatus {
    guard(|| {
        nonnull!(metric, ergosphere, out);
        let (m, ergo) = (&(*metric).0, &(*ergosphere).0);
        let found = choose_inner_curve(m, ergo).and_then(|inner| find_limit_cycle(m, ergo, &inner, &FinderOptions::default()));
        match found {
            Ok(rep) => emit(out, ArtbhHorizon(rep)),
            Err(e @ (Error::NoSignChange(_) | Error::NotCharacteristic { .. } | Error::IndefiniteSign { .. })) => {
                set_error(e.to_string());
                ArtbhStatus::NoHorizon
            }
            Err(e) => status_of(&e),
        }
    })
}

/// +1 for a black hole, −1 for a white hole, 0 for a null handle.
///
/// # Safety
/// `horizon` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn artbh_horizon_kind(horizon: *const ArtbhHorizon) -> c_int {
    match horizon.as_ref().map(|h| h.0.kind) {
        Some(HoleKind::BlackHole) => 1,
        Some(HoleKind::WhiteHole) => -1,
        None => 0,
    }
}

/// Mean distance of the horizon from its centre (NaN for null).
///
/// # Safety
/// `horizon` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn artbh_horizon_radius_mean(horizon: *const ArtbhHorizon) -> f64 {
    horizon.as_ref().map_or(f64::NAN, |h| h.0.radius_mean)
}

/// Max normalised characteristic residual (NaN for null).
///
/// # Safety
/// `horizon` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn artbh_horizon_residual(horizon: *const ArtbhHorizon) -> f64 {
    horizon.as_ref().map_or(f64::NAN, |h| h.0.char_residual)
}

/// A new curve handle holding the horizon curve.
///
/// # Safety
/// `horizon` must be a live handle, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn artbh_horizon_curve(horizon: *const ArtbhHorizon, out: *mut *mut ArtbhCurve) -> ArtbhStatus {
    guard(|| {
        nonnull!(horizon, out);
        emit(out, ArtbhCurve((*horizon).0.curve.clone()))
    })
}

/// # Safety
/// `horizon` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn artbh_horizon_free(horizon: *mut ArtbhHorizon) {
    if !horizon.is_null() {
        drop(Box::from_raw(horizon));
    }
}

/// Kerr closed-form checks; `passed` is 1 when both bounds hold.
///
/// # Safety
/// Output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn artbh_kerr_verify(
    m: f64,
    a: f64,
    n_samples: usize,
    h: f64,
    max_scaled_delta1: *mut f64,
    max_contour_error: *mut f64,
    passed: *mut c_int,
) -> ArtbhStatus {
    guard(|| {
        nonnull!(max_scaled_delta1, max_contour_error, passed);
        match kerr_verify(m, a, n_samples, h) {
            Ok(r) => {
                *max_scaled_delta1 = r.max_scaled_delta1;
                *max_contour_error = r.max_contour_error;
                *passed = r.passed as c_int;
                ArtbhStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Serialise the horizon report as JSON into a new string, freed with
/// [`artbh_string_free`].
///
/// # Safety
/// `horizon` must be a live handle, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn artbh_horizon_json(horizon: *const ArtbhHorizon, out: *mut *mut c_char) -> ArtbhStatus {
    guard(|| {
        nonnull!(horizon, out);
        match serde_json::to_string(&(*horizon).0) {
            Ok(s) => match CString::new(s) {
                Ok(c) => {
                    *out = c.into_raw();
                    ArtbhStatus::Ok
                }
                Err(e) => {
                    set_error(e.to_string());
                    ArtbhStatus::Internal
                }
            },
            Err(e) => {
                set_error(e.to_string());
                ArtbhStatus::Internal
            }
        }
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn artbh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
