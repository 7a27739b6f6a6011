//! C interface to the erasure-squeeze simulator.
//!
//! Parameter sets and scheme descriptions are opaque handles created by
//! `esq_*_new` functions and released with the matching `esq_*_free`.
//! Every fallible call returns an [`EsqStatus`]; on failure the message is
//! kept per thread and can be read with [`esq_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use erasure_squeeze::continuous::run_scheme;
use erasure_squeeze::discrete::{lambda_coefficient, simulate, Controls, SchemeConfig};
use erasure_squeeze::metrics::{dp_reference, ideal_tat_reference, xi_squared, SqueezingResult};
use erasure_squeeze::params::{derive_coupling, PhysicalParams};
use erasure_squeeze::sweeps::{optimize_point, PointSpec, Scheme, SearchSettings};
use erasure_squeeze::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EsqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    ModelViolation = 3,
    NotConverged = 4,
    Internal = 5,
}

/// Physical parameter set.
pub struct EsqParams(PhysicalParams);

/// Pass sequence with waveplate angles, Larmor rate and loss.
pub struct EsqScheme(SchemeConfig);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EsqSqueezing {
    pub xi2: f64,
    pub xi2_db: f64,
    pub theta_opt: f64,
    pub mean_jx_out: f64,
}

/// Result of a triple-pass search over decay and controls.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EsqOptimized {
    pub eta_tilde: f64,
    pub kappa2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub omega: f64,
    pub squeezing: EsqSqueezing,
}

impl From<SqueezingResult> for EsqSqueezing {
    fn from(r: SqueezingResult) -> Self {
        EsqSqueezing {
            xi2: r.xi2,
            xi2_db: r.xi2_db,
            theta_opt: r.theta_opt,
            mean_jx_out: r.mean_jx_out,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EsqStatus {
    match e.exit_code() {
        2 => EsqStatus::InvalidParameter,
        3 => EsqStatus::ModelViolation,
        4 => EsqStatus::NotConverged,
        _ => EsqStatus::Internal,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (EsqStatus, String)>) -> EsqStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EsqStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            EsqStatus::Internal
        }
    }
}

fn lib<T>(r: erasure_squeeze::Result<T>) -> Result<T, (EsqStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(name: &str) -> (EsqStatus, String) {
    (EsqStatus::NullPointer, format!("`{name}` is null"))
}

/// Create a parameter set. `out` receives a handle owned by the caller.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn esq_params_new(
    n_atoms: f64,
    optical_depth: f64,
    eta_tilde: f64,
    wall_reflectivity: f64,
    beam_angle: f64,
    pulse_duration: f64,
    out: *mut *mut EsqParams,
) -> EsqStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = PhysicalParams {
            n_atoms,
            optical_depth,
            eta_tilde,
            wall_reflectivity,
            beam_angle,
            pulse_duration,
            ..PhysicalParams::default()
        };
        lib(p.validate())?;
        *out = Box::into_raw(Box::new(EsqParams(p)));
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle from [`esq_params_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn esq_params_free(p: *mut EsqParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

unsafe fn put_scheme(out: *mut *mut EsqScheme, c: erasure_squeeze::Result<SchemeConfig>) -> Result<(), (EsqStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(EsqScheme(lib(c)?)));
    Ok(())
}

/// Forward, backward, forward passes with waveplate angles `alpha` and
/// `beta`, Larmor rate `omega` per pulse, beam angle `phi` and loss `zeta`
/// per re-entry.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn esq_scheme_triple_pass(
    alpha: f64,
    beta: f64,
    omega: f64,
    phi: f64,
    zeta: f64,
    out: *mut *mut EsqScheme,
) -> EsqStatus {
    guard(|| put_scheme(out, SchemeConfig::triple_pass(Controls { alpha, beta, omega }, phi, zeta)))
}

/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn esq_scheme_double_pass(zeta: f64, out: *mut *mut EsqScheme) -> EsqStatus {
    guard(|| put_scheme(out, SchemeConfig::double_pass(zeta)))
}

/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn esq_scheme_ring(n_passes: u32, zeta: f64, omega: f64, out: *mut *mut EsqScheme) -> EsqStatus {
    guard(|| put_scheme(out, SchemeConfig::ring(n_passes as usize, zeta, omega)))
}

/// # Safety
/// `s` must be null or a scheme handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn esq_scheme_free(s: *mut EsqScheme) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of passes of a scheme, 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live scheme handle.
#[no_mangle]
pub unsafe extern "C" fn esq_scheme_passes(s: *const EsqScheme) -> u32 {
    s.as_ref().map_or(0, |s| s.0.n_passes as u32)
}

unsafe fn handles<'a>(
    p: *const EsqParams,
    s: *const EsqScheme,
    out: *mut EsqSqueezing,
) -> Result<(&'a PhysicalParams, &'a SchemeConfig, &'a mut EsqSqueezing), (EsqStatus, String)> {
    let p = p.as_ref().ok_or_else(|| null("params"))?;
    let s = s.as_ref().ok_or_else(|| null("scheme"))?;
    let out = out.as_mut().ok_or_else(|| null("out"))?;
    Ok((&p.0, &s.0, out))
}

/// Slice simulation with `segments` slices per pulse.
///
/// # Safety
/// Handles must be live; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn esq_simulate(
    params: *const EsqParams,
    scheme: *const EsqScheme,
    segments: u32,
    out: *mut EsqSqueezing,
) -> EsqStatus {
    guard(|| {
        let (p, s, out) = handles(params, scheme, out)?;
        let r = lib(simulate(p, s, segments as usize))?;
        *out = lib(xi_squared(&r.spin_state.spin_cov(), r.mean_jx_out, p.mean_jx()))?.into();
        Ok(())
    })
}

/// Continuum-limit propagation of the same scheme.
///
/// # Safety
/// Handles must be live; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn esq_continuous(
    params: *const EsqParams,
    scheme: *const EsqScheme,
    out: *mut EsqSqueezing,
) -> EsqStatus {
    guard(|| {
        let (p, s, out) = handles(params, scheme, out)?;
        let k2 = lib(derive_coupling(p, s.n_passes))?.kappa2;
        let r = lib(run_scheme(k2, p.eta_tilde, s))?;
        *out = lib(xi_squared(&r.cov, r.mean_jx_ratio, 1.0))?.into();
        Ok(())
    })
}

/// Best triple-pass squeezing at optical depth `alpha0`, searching decay and
/// controls with the default settings.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn esq_optimize_tat(alpha0: f64, zeta: f64, phi: f64, out: *mut EsqOptimized) -> EsqStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let spec = PointSpec::new(Scheme::Tat, alpha0, zeta, phi);
        lib(spec.params(0.1).validate())?;
        if !(0.0..1.0).contains(&zeta) {
            return Err((EsqStatus::InvalidParameter, format!("zeta = {zeta} outside 0 <= zeta < 1")));
        }
        let r = lib(optimize_point(&spec, &SearchSettings::default()))?;
        *out = EsqOptimized {
            eta_tilde: r.eta_tilde,
            kappa2: r.kappa2,
            alpha: r.controls.alpha,
            beta: r.controls.beta,
            omega: r.controls.omega,
            squeezing: r.result.into(),
        };
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn esq_dp_reference(kappa: f64) -> f64 {
    dp_reference(kappa)
}

#[no_mangle]
pub extern "C" fn esq_ideal_tat_reference(kappa: f64, n_passes: u32) -> f64 {
    ideal_tat_reference(kappa, n_passes as usize)
}

#[no_mangle]
pub extern "C" fn esq_lambda_coefficient(n_passes: u32) -> f64 {
    lambda_coefficient(n_passes as usize)
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn esq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
