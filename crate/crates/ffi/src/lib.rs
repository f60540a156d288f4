//! C ABI for `nabla-fdm`.
//!
//! Every function returns an [`NfStatus`]. On failure a message is kept per
//! thread and can be read with [`nf_last_error`]. Approximants are opaque
//! handles released with [`nf_approximant_free`]; strings handed out by the
//! library are released with [`nf_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nabla_fdm::fdm::{simulate_operator, simulate_system};
use nabla_fdm::vecfit::{fit_operator, fit_with_integrator, make_grid};
use nabla_fdm::{
    caputo_diff, exact_solve, frac_sum, Error, FitConfig, FracOrder, RationalApproximant, SignalTrace, SystemSpec,
};
use num_complex::Complex64;

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NfStatus {
    Ok = 0,
    /// A required pointer was null.
    NullArgument = 1,
    /// An argument is outside its domain or lengths disagree.
    InvalidArgument = 2,
    /// Malformed text or an unusable configuration.
    Config = 3,
    /// Fitting or simulation broke down numerically.
    Numeric = 4,
    /// The caller's output buffer is too short; the message gives the needed length.
    BufferTooSmall = 5,
    /// Internal panic; the library state is still usable.
    Panic = 6,
}

/// A fitted rational approximant.
pub struct NfApproximant(RationalApproximant);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn status_of(err: &Error) -> NfStatus {
    match err {
        Error::Iteration { source, .. } => status_of(source),
        Error::Domain(_) | Error::OutOfRange { .. } | Error::Length { .. } | Error::Dimension(_) => {
            NfStatus::InvalidArgument
        }
        e if e.is_config() => NfStatus::Config,
        _ => NfStatus::Numeric,
    }
}

struct Fail(NfStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(NfStatus::NullArgument, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> NfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            NfStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            NfStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn handle<'a>(ap: *const NfApproximant) -> Result<&'a RationalApproximant, Fail> {
    ap.as_ref().map(|h| &h.0).ok_or_else(|| null("approximant"))
}

unsafe fn give(out: *mut *mut NfApproximant, ap: RationalApproximant) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(NfApproximant(ap)));
    Ok(())
}

unsafe fn copy_out(values: &[f64], out: *mut f64, out_len: usize) -> Result<(), Fail> {
    if out_len < values.len() {
        return Err(Fail(
            NfStatus::BufferTooSmall,
            format!("output holds {out_len} values, {} needed", values.len()),
        ));
    }
    slice_mut(out, values.len(), "out")?.copy_from_slice(values);
    Ok(())
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn nf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

fn fit_with(
    integrator: bool,
    alpha: f64,
    omega_l: f64,
    omega_h: f64,
    samples: usize,
    order: usize,
    iterations: usize,
) -> Result<RationalApproximant, Fail> {
    let alpha = FracOrder::new(alpha)?;
    let grid = make_grid(omega_l, omega_h, samples)?;
    let cfg = FitConfig::new(order, iterations);
    Ok(if integrator {
        fit_with_integrator(alpha, &grid, cfg)?
    } else {
        fit_operator(alpha, &grid, cfg)?
    })
}

/// Fits `1/s^alpha` with `order + 1` poles on `samples` log-spaced
/// frequencies over `[omega_l, omega_h]`.
///
/// # Safety
/// `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn nf_fit_operator(
    alpha: f64,
    omega_l: f64,
    omega_h: f64,
    samples: usize,
    order: usize,
    iterations: usize,
    out: *mut *mut NfApproximant,
) -> NfStatus {
    guard(|| {
        give(
            out,
            fit_with(false, alpha, omega_l, omega_h, samples, order, iterations)?,
        )
    })
}

/// Like [`nf_fit_operator`] with a pole at `s = 0` and `order` further poles.
///
/// # Safety
/// `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn nf_fit_with_integrator(
    alpha: f64,
    omega_l: f64,
    omega_h: f64,
    samples: usize,
    order: usize,
    iterations: usize,
    out: *mut *mut NfApproximant,
) -> NfStatus {
    guard(|| {
        give(
            out,
            fit_with(true, alpha, omega_l, omega_h, samples, order, iterations)?,
        )
    })
}

/// Builds an approximant from `len` poles and residues given as split real
/// and imaginary parts.
///
/// # Safety
/// The four arrays must hold `len` values each; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nf_approximant_new(
    alpha: f64,
    pole_re: *const f64,
    pole_im: *const f64,
    residue_re: *const f64,
    residue_im: *const f64,
    len: usize,
    has_integrator: bool,
    out: *mut *mut NfApproximant,
) -> NfStatus {
    guard(|| {
        let join = |re: &[f64], im: &[f64]| re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let poles = join(slice(pole_re, len, "pole_re")?, slice(pole_im, len, "pole_im")?);
        let residues = join(
            slice(residue_re, len, "residue_re")?,
            slice(residue_im, len, "residue_im")?,
        );
        give(
            out,
            RationalApproximant::new(alpha, poles, residues, None, has_integrator)?,
        )
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `ap` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nf_approximant_free(ap: *mut NfApproximant) {
    if !ap.is_null() {
        drop(Box::from_raw(ap));
    }
}

/// Number of poles, integrator included.
///
/// # Safety
/// `ap` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nf_approximant_len(ap: *const NfApproximant, out: *mut usize) -> NfStatus {
    guard(|| {
        let n = handle(ap)?.poles().len();
        *out.as_mut().ok_or_else(|| null("out"))? = n;
        Ok(())
    })
}

/// Fractional order, sample-space fit error `J` and integrator flag.
///
/// # Safety
/// `ap` must be a live handle; each non-null output must be writable.
#[no_mangle]
pub unsafe extern "C" fn nf_approximant_info(
    ap: *const NfApproximant,
    alpha: *mut f64,
    fit_error: *mut f64,
    has_integrator: *mut bool,
) -> NfStatus {
    guard(|| {
        let ap = handle(ap)?;
        if let Some(p) = alpha.as_mut() {
            *p = ap.alpha();
        }
        if let Some(p) = fit_error.as_mut() {
            *p = ap.fit_error();
        }
        if let Some(p) = has_integrator.as_mut() {
            *p = ap.has_integrator();
        }
        Ok(())
    })
}

unsafe fn split_out(values: &[Complex64], re: *mut f64, im: *mut f64, cap: usize) -> Result<(), Fail> {
    let (r, i): (Vec<f64>, Vec<f64>) = values.iter().map(|z| (z.re, z.im)).unzip();
    copy_out(&r, re, cap)?;
    copy_out(&i, im, cap)
}

/// Copies the `ω_i` (pole at `-ω_i`) into two arrays of capacity `cap`.
///
/// # Safety
/// `ap` must be a live handle; `re` and `im` must hold `cap` values.
#[no_mangle]
pub unsafe extern "C" fn nf_approximant_poles(
    ap: *const NfApproximant,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
) -> NfStatus {
    guard(|| split_out(handle(ap)?.poles(), re, im, cap))
}

/// Copies the residues `c_i` into two arrays of capacity `cap`.
///
/// # Safety
/// As [`nf_approximant_poles`].
#[no_mangle]
pub unsafe extern "C" fn nf_approximant_residues(
    ap: *const NfApproximant,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
) -> NfStatus {
    guard(|| split_out(handle(ap)?.residues(), re, im, cap))
}

/// Evaluates the approximant at `s = s_re + j·s_im`.
///
/// # Safety
/// `ap` must be a live handle; `out_re` and `out_im` writable.
#[no_mangle]
pub unsafe extern "C" fn nf_approximant_eval(
    ap: *const NfApproximant,
    s_re: f64,
    s_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> NfStatus {
    guard(|| {
        let v = handle(ap)?.eval(Complex64::new(s_re, s_im));
        *out_re.as_mut().ok_or_else(|| null("out_re"))? = v.re;
        *out_im.as_mut().ok_or_else(|| null("out_im"))? = v.im;
        Ok(())
    })
}

/// Serializes to TOML. Release the string with [`nf_string_free`].
///
/// # Safety
/// `ap` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nf_approximant_to_toml(ap: *const NfApproximant, out: *mut *mut c_char) -> NfStatus {
    guard(|| {
        let text = CString::new(handle(ap)?.to_toml()).map_err(|e| Fail(NfStatus::Config, e.to_string()))?;
        *out.as_mut().ok_or_else(|| null("out"))? = text.into_raw();
        Ok(())
    })
}

/// Parses the TOML written by [`nf_approximant_to_toml`].
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nf_approximant_from_toml(text: *const c_char, out: *mut *mut NfApproximant) -> NfStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| Fail(NfStatus::Config, format!("approximant text is not UTF-8: {e}")))?;
        give(out, RationalApproximant::from_toml(text)?)
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn trace_in(a: i64, values: *const f64, len: usize) -> Result<SignalTrace, Fail> {
    Ok(SignalTrace::new(a, slice(values, len, "values")?.to_vec())?)
}

/// `len` samples `f(a) .. f(a+len-1)` in, the same instants of the
/// fractional sum of order `alpha` out.
///
/// # Safety
/// `values` and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn nf_frac_sum(a: i64, values: *const f64, len: usize, alpha: f64, out: *mut f64) -> NfStatus {
    guard(|| {
        let y = frac_sum(&trace_in(a, values, len)?, FracOrder::new(alpha)?)?;
        copy_out(y.values(), out, len)
    })
}

/// Caputo difference of order `0 < alpha < 1`, same layout as [`nf_frac_sum`].
///
/// # Safety
/// `values` and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn nf_caputo_diff(a: i64, values: *const f64, len: usize, alpha: f64, out: *mut f64) -> NfStatus {
    guard(|| {
        let y = caputo_diff(&trace_in(a, values, len)?, FracOrder::caputo(alpha)?)?;
        copy_out(y.values(), out, len)
    })
}

/// Drives the approximant from rest with `u(a) .. u(a+len-1)`; `out(a) = 0`.
///
/// # Safety
/// `ap` must be a live handle; `u` and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn nf_simulate_operator(
    ap: *const NfApproximant,
    a: i64,
    u: *const f64,
    len: usize,
    out: *mut f64,
) -> NfStatus {
    guard(|| {
        let y = simulate_operator(handle(ap)?, &trace_in(a, u, len)?)?;
        copy_out(y.values(), out, len)
    })
}

fn linear(alpha: f64, a: i64, x0: f64, lambda: f64) -> Result<SystemSpec, Fail> {
    Ok(SystemSpec::linear_scalar(FracOrder::caputo(alpha)?, a, x0, lambda))
}

/// Pseudo-state of `∇^α x(k) = -lambda·x(k) + u(k)`, `x(a) = x0`, stepped
/// with the approximant (its order is the system order). `x0 ≠ 0` needs an
/// integrator approximant.
///
/// # Safety
/// `ap` must be a live handle; `u` and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn nf_simulate_linear(
    ap: *const NfApproximant,
    lambda: f64,
    x0: f64,
    a: i64,
    u: *const f64,
    len: usize,
    out: *mut f64,
) -> NfStatus {
    guard(|| {
        let ap = handle(ap)?;
        let u = trace_in(a, u, len)?;
        let sys = linear(ap.alpha(), a, x0, lambda)?;
        let run = simulate_system(&sys, &u, std::slice::from_ref(ap), len - 1)?;
        copy_out(run.state(0).values(), out, len)
    })
}

/// Reference solution of the same system from the defining sums.
///
/// # Safety
/// `u` and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn nf_exact_linear(
    alpha: f64,
    lambda: f64,
    x0: f64,
    a: i64,
    u: *const f64,
    len: usize,
    out: *mut f64,
) -> NfStatus {
    guard(|| {
        let u = trace_in(a, u, len)?;
        let run = exact_solve(&linear(alpha, a, x0, lambda)?, &u, len - 1)?;
        copy_out(run.state(0).values(), out, len)
    })
}
