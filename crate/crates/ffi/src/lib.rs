//! C ABI for kanvex.
//!
//! Every fallible call returns a [`KxStatus`]; on failure the message is kept
//! per thread and read back with [`kx_last_error`]. Handles are opaque and
//! released with their matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kanvex::gam::{gam_relaxation_min, Mpgam};
use kanvex::oracles::multistart_min;
use kanvex::pkan::{build_relaxation, Pkan};
use kanvex::solver::{relative_gap, solve_relaxation, SolveStatus};
use kanvex::{build_envelope, concave_envelope, Error, Interval, PiecewiseEnvelope, Polynomial, Segment};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    OutOfDomain = 4,
    NotMonotone = 5,
    Numerical = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KxSegmentKind {
    Poly = 0,
    Affine = 1,
}

/// One envelope piece. `slope` and `intercept` are zero for `POLY` pieces.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KxSegment {
    pub kind: KxSegmentKind,
    pub from: f64,
    pub to: f64,
    pub slope: f64,
    pub intercept: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KxSolveStatus {
    Optimal = 0,
    IterationLimit = 1,
    InfeasibleMaster = 2,
}

/// Opaque convex or concave envelope of a polynomial on an interval.
pub struct KxEnvelope(PiecewiseEnvelope);

/// Opaque polynomial KAN.
pub struct KxPkan(Pkan);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: KxStatus, msg: impl Into<String>) -> KxStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> KxStatus {
    match e {
        Error::Parse { .. } => KxStatus::Parse,
        Error::InvalidInterval { .. } | Error::DimensionMismatch { .. } | Error::IdenticallyZero => {
            KxStatus::InvalidArgument
        }
        Error::OutOfDomain { .. } => KxStatus::OutOfDomain,
        Error::NotMonotone { .. } => KxStatus::NotMonotone,
        _ => KxStatus::Numerical,
    }
}

/// Runs `f`, turning errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), KxStatus>) -> KxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KxStatus::Ok,
        Ok(Err(s)) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(KxStatus::Panic, format!("panic: {msg}"))
        }
    }
}

fn check<T>(r: kanvex::Result<T>) -> Result<T, KxStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn non_null<'a, T>(p: *const T, name: &str) -> Result<&'a T, KxStatus> {
    p.as_ref().ok_or_else(|| fail(KxStatus::NullPointer, format!("{name} is null")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], KxStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(p, name)?;
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, KxStatus> {
    non_null(p, name)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(KxStatus::Parse, format!("{name} is not valid UTF-8")))
}

unsafe fn write<T>(out: *mut T, v: T, name: &str) -> Result<(), KxStatus> {
    if out.is_null() {
        return Err(fail(KxStatus::NullPointer, format!("{name} is null")));
    }
    out.write(v);
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn kx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from a `kx_*` function returning `char *` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn kx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn envelope_build(
    coeffs: *const f64,
    len: usize,
    lo: f64,
    hi: f64,
    tol: f64,
    concave: bool,
    out: *mut *mut KxEnvelope,
) -> KxStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(KxStatus::NullPointer, "out is null"));
        }
        let c = slice(coeffs, len, "coeffs")?;
        if c.is_empty() {
            return Err(fail(KxStatus::InvalidArgument, "no coefficients"));
        }
        let p = Polynomial::new(c.to_vec());
        let iv = check(Interval::new(lo, hi))?;
        let env = check(if concave {
            concave_envelope(&p, iv, tol)
        } else {
            build_envelope(&p, iv, tol)
        })?;
        out.write(Box::into_raw(Box::new(KxEnvelope(env))));
        Ok(())
    })
}

/// Convex envelope of `sum coeffs[i] x^i` on `[lo, hi]`.
///
/// # Safety
/// `coeffs` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kx_envelope_build(
    coeffs: *const f64,
    len: usize,
    lo: f64,
    hi: f64,
    tol: f64,
    out: *mut *mut KxEnvelope,
) -> KxStatus {
    envelope_build(coeffs, len, lo, hi, tol, false, out)
}

/// Concave envelope, `-e(-p)`.
///
/// # Safety
/// As for [`kx_envelope_build`].
#[no_mangle]
pub unsafe extern "C" fn kx_concave_envelope_build(
    coeffs: *const f64,
    len: usize,
    lo: f64,
    hi: f64,
    tol: f64,
    out: *mut *mut KxEnvelope,
) -> KxStatus {
    envelope_build(coeffs, len, lo, hi, tol, true, out)
}

/// # Safety
/// `env` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kx_envelope_eval(env: *const KxEnvelope, x: f64, out: *mut f64) -> KxStatus {
    guard(|| {
        let env = non_null(env, "env")?;
        let v = check(env.0.eval(x))?;
        write(out, v, "out")
    })
}

/// A subgradient at `x`.
///
/// # Safety
/// `env` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kx_envelope_slope(env: *const KxEnvelope, x: f64, out: *mut f64) -> KxStatus {
    guard(|| {
        let env = non_null(env, "env")?;
        let v = check(env.0.slope(x))?;
        write(out, v, "out")
    })
}

/// Number of pieces; 0 for a NULL handle.
///
/// # Safety
/// `env` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kx_envelope_segment_count(env: *const KxEnvelope) -> usize {
    env.as_ref().map_or(0, |e| e.0.segments().len())
}

/// # Safety
/// `env` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kx_envelope_segment(env: *const KxEnvelope, index: usize, out: *mut KxSegment) -> KxStatus {
    guard(|| {
        let env = non_null(env, "env")?;
        let seg = env.0.segments().get(index).ok_or_else(|| {
            fail(
                KxStatus::InvalidArgument,
                format!("segment {index} out of range ({} segments)", env.0.segments().len()),
            )
        })?;
        let v = match *seg {
            Segment::Poly { from, to } => KxSegment {
                kind: KxSegmentKind::Poly,
                from,
                to,
                slope: 0.0,
                intercept: 0.0,
            },
            Segment::Affine {
                from,
                to,
                slope,
                intercept,
            } => KxSegment {
                kind: KxSegmentKind::Affine,
                from,
                to,
                slope,
                intercept,
            },
        };
        write(out, v, "out")
    })
}

/// The envelope as JSON; free with [`kx_string_free`]. NULL on failure.
///
/// # Safety
/// `env` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kx_envelope_to_json(env: *const KxEnvelope) -> *mut c_char {
    let mut s = ptr::null_mut();
    guard(|| {
        let env = non_null(env, "env")?;
        let text = check(env.0.to_json())?;
        s = CString::new(text).map_err(|_| fail(KxStatus::Numerical, "JSON contains NUL"))?.into_raw();
        Ok(())
    });
    s
}

/// # Safety
/// `env` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kx_envelope_free(env: *mut KxEnvelope) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// Parses a network from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kx_pkan_from_json(json: *const c_char, out: *mut *mut KxPkan) -> KxStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(KxStatus::NullPointer, "out is null"));
        }
        let net = check(Pkan::from_json(c_str(json, "json")?))?;
        out.write(Box::into_raw(Box::new(KxPkan(net))));
        Ok(())
    })
}

/// Random network of `layers` layers with the given hidden width, input
/// dimension and edge degree.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kx_pkan_generate(
    layers: usize,
    width: usize,
    inputs: usize,
    degree: usize,
    seed: u64,
    out: *mut *mut KxPkan,
) -> KxStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(KxStatus::NullPointer, "out is null"));
        }
        if layers == 0 || width == 0 || inputs == 0 {
            return Err(fail(KxStatus::InvalidArgument, "layers, width and inputs must be positive"));
        }
        let net = Pkan::generate_random(layers, width, inputs, degree, seed);
        out.write(Box::into_raw(Box::new(KxPkan(net))));
        Ok(())
    })
}

/// Input dimension; 0 for a NULL handle.
///
/// # Safety
/// `net` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kx_pkan_input_dim(net: *const KxPkan) -> usize {
    net.as_ref().map_or(0, |n| n.0.input_dim())
}

/// # Safety
/// `net` must be a live handle, `x` must point to `len` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kx_pkan_forward(net: *const KxPkan, x: *const f64, len: usize, out: *mut f64) -> KxStatus {
    guard(|| {
        let net = non_null(net, "net")?;
        let v = check(net.0.forward_eval(slice(x, len, "x")?))?;
        write(out, v, "out")
    })
}

/// Lower bound on the network minimum over its input box, from the convex
/// relaxation. `status` may be NULL.
///
/// # Safety
/// `net` must be a live handle; `out` must be writable; `status` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn kx_pkan_lower_bound(
    net: *const KxPkan,
    tol: f64,
    feas_tol: f64,
    max_iters: usize,
    out: *mut f64,
    status: *mut KxSolveStatus,
) -> KxStatus {
    guard(|| {
        let net = non_null(net, "net")?;
        let rp = check(build_relaxation(&net.0, tol))?;
        let report = check(solve_relaxation(&rp, feas_tol, max_iters))?;
        write(out, report.lower_bound, "out")?;
        if !status.is_null() {
            status.write(match report.status {
                SolveStatus::Optimal => KxSolveStatus::Optimal,
                SolveStatus::IterationLimit => KxSolveStatus::IterationLimit,
                SolveStatus::InfeasibleMaster => KxSolveStatus::InfeasibleMaster,
            });
        }
        Ok(())
    })
}

/// Best value found by seeded multistart search, an upper bound on the
/// minimum. `x` receives the point if non-NULL and `len` matches the input dimension.
///
/// # Safety
/// `net` must be a live handle; `out` writable; `x` NULL or `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn kx_pkan_multistart(
    net: *const KxPkan,
    samples: usize,
    seed: u64,
    out: *mut f64,
    x: *mut f64,
    len: usize,
) -> KxStatus {
    guard(|| {
        let net = non_null(net, "net")?;
        if samples == 0 {
            return Err(fail(KxStatus::InvalidArgument, "samples must be positive"));
        }
        if !x.is_null() && len != net.0.input_dim() {
            let e = Error::DimensionMismatch {
                expected: net.0.input_dim(),
                found: len,
            };
            return Err(fail(KxStatus::InvalidArgument, e.to_string()));
        }
        let (v, point) = multistart_min(&net.0, samples, seed);
        write(out, v, "out")?;
        if !x.is_null() {
            ptr::copy_nonoverlapping(point.as_ptr(), x, len);
        }
        Ok(())
    })
}

/// The network as JSON; free with [`kx_string_free`]. NULL on failure.
///
/// # Safety
/// `net` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kx_pkan_to_json(net: *const KxPkan) -> *mut c_char {
    let mut s = ptr::null_mut();
    guard(|| {
        let net = non_null(net, "net")?;
        let text = check(net.0.to_json())?;
        s = CString::new(text).map_err(|_| fail(KxStatus::Numerical, "JSON contains NUL"))?.into_raw();
        Ok(())
    });
    s
}

/// # Safety
/// `net` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kx_pkan_free(net: *mut KxPkan) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Exact minimum of a monotone polynomial GAM given as JSON. `argmin`
/// receives the minimizer if non-NULL; `len` must then equal the dimension.
///
/// # Safety
/// `json` must be NUL-terminated; `out` writable; `argmin` NULL or `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn kx_gam_min(
    json: *const c_char,
    tol: f64,
    out: *mut f64,
    argmin: *mut f64,
    len: usize,
) -> KxStatus {
    guard(|| {
        let g = check(Mpgam::from_json(c_str(json, "json")?))?;
        let (v, x) = check(gam_relaxation_min(&g, tol))?;
        if !argmin.is_null() && len != x.len() {
            let e = Error::DimensionMismatch {
                expected: x.len(),
                found: len,
            };
            return Err(fail(KxStatus::InvalidArgument, e.to_string()));
        }
        write(out, v, "out")?;
        if !argmin.is_null() {
            ptr::copy_nonoverlapping(x.as_ptr(), argmin, len);
        }
        Ok(())
    })
}

/// `|f_relax - f_star| / (|f_star| + 1e-12) * 100`.
#[no_mangle]
pub extern "C" fn kx_relative_gap(f_relax: f64, f_star: f64) -> f64 {
    relative_gap(f_relax, f_star)
}
