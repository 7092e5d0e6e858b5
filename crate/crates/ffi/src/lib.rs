//! C ABI over the weak-inequality toolkit. Handles are opaque pointers
//! created by the `*_parse` constructors and released by the matching
//! `*_free`; every fallible call returns a status code and leaves a
//! message readable through `g2_last_error_message` on the same thread.
//!
//! Extended-real results (diverging rates, vacuous bounds) come back as
//! C `INFINITY` with an `Ok` status — infinity is a legitimate answer for
//! these functionals, not an error.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use gamma2_core::error::Error;
use gamma2_core::logconcave::{beta_from_curvature_tail, cp_bound_milman};
use gamma2_core::measure::{build_grid, Potential1D, TAIL_TOL};
use gamma2_core::ratefn::transforms::{
    beta_wp_from_xi, xi_from_beta_wp, xi_levelset_from_beta_wp,
};
use gamma2_core::ratefn::RateFunction;
use gamma2_core::spectral::discretize;

/// Status codes shared by every fallible call.
#[repr(i32)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum G2Status {
    /// Success; output parameters are valid.
    Ok = 0,
    /// A pointer was null or a numeric argument was out of domain.
    InvalidArgument = 1,
    /// The model or rate function violates a structural precondition.
    Model = 2,
    /// A numerical routine failed to meet its accuracy contract.
    Numeric = 3,
    /// Malformed JSON or text input.
    Parse = 4,
}

/// Opaque handle over a rate function `s -> beta(s)`.
pub struct G2RateFn {
    inner: RateFunction,
}

/// Opaque handle over a one-dimensional potential model.
pub struct G2Model {
    inner: Potential1D,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(e: &Error) -> G2Status {
    match e {
        Error::Model(_) | Error::Config(_) | Error::Io(_) => G2Status::Model,
        Error::Numeric(_) | Error::Sampling(_) => G2Status::Numeric,
        Error::Json(_) => G2Status::Parse,
    }
}

fn fail(e: &Error) -> G2Status {
    set_error(&e.to_string());
    status_of(e)
}

fn invalid(msg: &str) -> G2Status {
    set_error(msg);
    G2Status::InvalidArgument
}

/// Run a fallible body with a panic shield; panics become `Numeric`.
fn shielded(body: impl FnOnce() -> G2Status) -> G2Status {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            G2Status::Numeric
        }
    }
}

unsafe fn parse_utf8<'a>(ptr: *const c_char) -> Result<&'a str, G2Status> {
    if ptr.is_null() {
        return Err(invalid("null string argument"));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("input is not valid UTF-8");
        G2Status::Parse
    })
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn g2_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parse a rate function from its JSON encoding (tagged by `family`).
/// On success `*out` owns the handle; release it with `g2_ratefn_free`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn g2_ratefn_parse(
    json: *const c_char,
    out: *mut *mut G2RateFn,
) -> G2Status {
    shielded(|| {
        if out.is_null() {
            return invalid("null output pointer");
        }
        let text = match parse_utf8(json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match RateFunction::from_json(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(G2RateFn { inner }));
                G2Status::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Serialize the rate function back to JSON. The returned string is owned
/// by the caller; release it with `g2_string_free`.
///
/// # Safety
/// `handle` must come from `g2_ratefn_parse` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn g2_ratefn_to_json(
    handle: *const G2RateFn,
    out: *mut *mut c_char,
) -> G2Status {
    shielded(|| {
        let (Some(h), false) = (handle.as_ref(), out.is_null()) else {
            return invalid("null handle or output pointer");
        };
        match h.inner.to_json() {
            Ok(json) => match CString::new(json) {
                Ok(c) => {
                    *out = c.into_raw();
                    G2Status::Ok
                }
                Err(_) => invalid("serialized JSON contained NUL"),
            },
            Err(e) => fail(&e),
        }
    })
}

/// Evaluate `beta(s)`. Non-positive `s` and diverging families yield
/// `INFINITY` with an `Ok` status.
///
/// # Safety
/// `handle` must come from `g2_ratefn_parse` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn g2_ratefn_eval(
    handle: *const G2RateFn,
    s: f64,
    out: *mut f64,
) -> G2Status {
    shielded(|| {
        let (Some(h), false) = (handle.as_ref(), out.is_null()) else {
            return invalid("null handle or output pointer");
        };
        if s.is_nan() {
            return invalid("s is NaN");
        }
        *out = h.inner.eval_ext(s).to_f64();
        G2Status::Ok
    })
}

/// Generalized inverse `inf { s : beta(s) <= t }`; `INFINITY` when the
/// level is never reached.
///
/// # Safety
/// `handle` must come from `g2_ratefn_parse` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn g2_ratefn_generalized_inverse(
    handle: *const G2RateFn,
    t: f64,
    out: *mut f64,
) -> G2Status {
    shielded(|| {
        let (Some(h), false) = (handle.as_ref(), out.is_null()) else {
            return invalid("null handle or output pointer");
        };
        if t.is_nan() {
            return invalid("t is NaN");
        }
        *out = h.inner.generalized_inverse(t).to_f64();
        G2Status::Ok
    })
}

/// Decay-rate transform: treats the handle as a weak-inequality rate and
/// returns the variance-decay envelope at time `t`.
///
/// # Safety
/// `handle` must come from `g2_ratefn_parse` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn g2_ratefn_decay_envelope(
    handle: *const G2RateFn,
    t: f64,
    out: *mut f64,
) -> G2Status {
    shielded(|| {
        let (Some(h), false) = (handle.as_ref(), out.is_null()) else {
            return invalid("null handle or output pointer");
        };
        if !(t > 0.0) || !t.is_finite() {
            return invalid("t must be finite and > 0");
        }
        match xi_from_beta_wp(&h.inner, t) {
            Ok(v) => {
                *out = v;
                G2Status::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Level-set variant of the decay-rate transform.
///
/// # Safety
/// `handle` must come from `g2_ratefn_parse` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn g2_ratefn_decay_levelset(
    handle: *const G2RateFn,
    t: f64,
    out: *mut f64,
) -> G2Status {
    shielded(|| {
        let (Some(h), false) = (handle.as_ref(), out.is_null()) else {
            return invalid("null handle or output pointer");
        };
        if !(t > 0.0) || !t.is_finite() {
            return invalid("t must be finite and > 0");
        }
        match xi_levelset_from_beta_wp(&h.inner, t) {
            Ok(v) => {
                *out = v;
                G2Status::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Converse transform: treats the handle as a decay envelope `xi` and
/// recovers a weak-inequality rate at slack `s`; `INFINITY` when the
/// envelope never certifies that slack.
///
/// # Safety
/// `handle` must come from `g2_ratefn_parse` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn g2_ratefn_rate_from_decay(
    handle: *const G2RateFn,
    s: f64,
    out: *mut f64,
) -> G2Status {
    shielded(|| {
        let (Some(h), false) = (handle.as_ref(), out.is_null()) else {
            return invalid("null handle or output pointer");
        };
        if !(s > 0.0) || !s.is_finite() {
            return invalid("s must be finite and > 0");
        }
        match beta_wp_from_xi(&h.inner, s) {
            Ok(v) => {
                *out = v.to_f64();
                G2Status::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Release a rate-function handle. Null is a no-op.
///
/// # Safety
/// `handle` must come from `g2_ratefn_parse` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn g2_ratefn_free(handle: *mut G2RateFn) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Release a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must come from `g2_ratefn_to_json` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn g2_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a one-dimensional potential model from JSON (tagged by `type`:
/// gaussian, subbotin, uniform, double_well, custom_1d). On success `*out`
/// owns the handle; release it with `g2_model_free`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn g2_model_parse(
    json: *const c_char,
    out: *mut *mut G2Model,
) -> G2Status {
    shielded(|| {
        if out.is_null() {
            return invalid("null output pointer");
        }
        let text = match parse_utf8(json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match serde_json::from_str::<Potential1D>(text) {
            Ok(inner) => match build_grid(&inner, 64, TAIL_TOL) {
                // cheap probe so structurally bad models fail at parse time
                Ok(_) => {
                    *out = Box::into_raw(Box::new(G2Model { inner }));
                    G2Status::Ok
                }
                Err(e) => fail(&e),
            },
            Err(e) => {
                set_error(&e.to_string());
                G2Status::Parse
            }
        }
    })
}

/// Release a model handle. Null is a no-op.
///
/// # Safety
/// `handle` must come from `g2_model_parse` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn g2_model_free(handle: *mut G2Model) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

fn with_generator<T>(
    pot: &Potential1D,
    resolution: u32,
    body: impl FnOnce(&gamma2_core::spectral::DiscreteGenerator) -> Result<T, Error>,
) -> Result<T, Error> {
    let grid = build_grid(pot, resolution as usize, TAIL_TOL)?;
    let g = discretize(grid)?;
    body(&g)
}

/// Exact spectral Poincaré constant of the model at the given grid
/// resolution.
///
/// # Safety
/// `handle` must come from `g2_model_parse` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn g2_model_poincare_constant(
    handle: *const G2Model,
    resolution: u32,
    out: *mut f64,
) -> G2Status {
    shielded(|| {
        let (Some(h), false) = (handle.as_ref(), out.is_null()) else {
            return invalid("null handle or output pointer");
        };
        match with_generator(&h.inner, resolution, |g| g.poincare_constant()) {
            Ok(v) => {
                *out = v;
                G2Status::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Integrated-curvature constant of the model; agrees with the Poincaré
/// constant on these generators.
///
/// # Safety
/// `handle` must come from `g2_model_parse` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn g2_model_integrated_gamma2(
    handle: *const G2Model,
    resolution: u32,
    out: *mut f64,
) -> G2Status {
    shielded(|| {
        let (Some(h), false) = (handle.as_ref(), out.is_null()) else {
            return invalid("null handle or output pointer");
        };
        match with_generator(&h.inner, resolution, |g| g.integrated_gamma2_constant()) {
            Ok(v) => {
                *out = v;
                G2Status::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Curvature-tail Poincaré upper bound for the model; `INFINITY` when the
/// clipped inverse-rate mass diverges (the bound is then vacuous, not an
/// error).
///
/// # Safety
/// `handle` must come from `g2_model_parse` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn g2_model_curvature_tail_bound(
    handle: *const G2Model,
    resolution: u32,
    out: *mut f64,
) -> G2Status {
    shielded(|| {
        let (Some(h), false) = (handle.as_ref(), out.is_null()) else {
            return invalid("null handle or output pointer");
        };
        let bound = with_generator(&h.inner, resolution, |g| {
            let beta = beta_from_curvature_tail(g.measure())?;
            Ok(cp_bound_milman(&beta))
        });
        match bound {
            Ok(report) => {
                *out = report.value.to_f64();
                G2Status::Ok
            }
            Err(e) => fail(&e),
        }
    })
}
