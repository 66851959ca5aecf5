//! C interface to `ilab-core`.
//!
//! Every fallible call returns an [`IlabStatus`]; on failure the message is
//! available from [`ilab_last_error`] on the calling thread until the next call.
//! Profiles and equilibria are opaque handles released with their `_free`
//! function. Results are written through out-pointers.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ilab_core::illposed::{select_parameters, ParamRequest};
use ilab_core::numerics::roots::{Rect, RootOptions};
use ilab_core::penrose::{dispersion, gamma0_kinetic, DispersionKernel, PenroseOptions};
use ilab_core::profiles::{EquilibriumKind, EquilibriumParams, RadialEquilibrium, ShearProfile};
use ilab_core::rayleigh::{evans, gamma0_hydro, RayleighOptions, SearchBox};
use ilab_core::{Error, C64};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    NearCriticalLayer = 3,
    Precondition = 4,
    Unresolved = 5,
    /// Nothing unstable in the search box; an outcome, not a failure of the solver.
    Stable = 6,
    Resolution = 7,
    Admissibility = 8,
    Internal = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IlabComplex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for IlabComplex {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<IlabComplex> for C64 {
    fn from(z: IlabComplex) -> Self {
        C64::new(z.re, z.im)
    }
}

/// Axis-aligned search box `[re_min, re_max] × [im_min, im_max]`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IlabBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IlabKernel {
    Kie = 0,
    Vdb = 1,
}

impl From<IlabKernel> for DispersionKernel {
    fn from(k: IlabKernel) -> Self {
        match k {
            IlabKernel::Kie => DispersionKernel::Kie,
            IlabKernel::Vdb => DispersionKernel::Vdb,
        }
    }
}

/// Inputs of the oscillatory-data parameter selection (single ε).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IlabParamRequest {
    pub s: f64,
    pub alpha: f64,
    pub k: f64,
    pub d: f64,
    pub m: u32,
    pub big_m: u32,
    pub beta: f64,
    pub lambda0: IlabComplex,
    pub k0: f64,
    pub gamma: f64,
    pub delta0_prime: f64,
    pub eps: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct IlabParams {
    pub alpha_prime: f64,
    pub kappa: f64,
    pub gamma1: f64,
    pub delta0: f64,
    pub s_eps: f64,
    pub t_eps: f64,
    pub predicted_exponent: f64,
}

/// Opaque shear profile.
pub struct IlabProfile(ShearProfile);

/// Opaque radial equilibrium.
pub struct IlabEquilibrium(RadialEquilibrium);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> IlabStatus {
    match e {
        Error::InvalidParameter(_) | Error::Config { .. } => IlabStatus::InvalidParameter,
        Error::NearCriticalLayer { .. } => IlabStatus::NearCriticalLayer,
        Error::Precondition(_) | Error::TimeStep { .. } => IlabStatus::Precondition,
        Error::Unresolved(_) => IlabStatus::Unresolved,
        Error::Stable(_) => IlabStatus::Stable,
        Error::Resolution(_) => IlabStatus::Resolution,
        Error::Admissibility(_) => IlabStatus::Admissibility,
        _ => IlabStatus::Internal,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (IlabStatus, String)>) -> IlabStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IlabStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("panic inside ilab");
            IlabStatus::Panic
        }
    }
}

fn core<T>(r: ilab_core::Result<T>) -> Result<T, (IlabStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (IlabStatus, String) {
    (IlabStatus::NullPointer, format!("{what} is null"))
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), (IlabStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(v);
    Ok(())
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (IlabStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread (empty after a success).
/// The pointer stays valid until the next ilab call on the same thread.
#[no_mangle]
pub extern "C" fn ilab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ilab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// Profiles

unsafe fn new_profile(out: *mut *mut IlabProfile, p: ilab_core::Result<ShearProfile>) -> Result<(), (IlabStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    let p = core(p)?;
    out.write(Box::into_raw(Box::new(IlabProfile(p))));
    Ok(())
}

/// `U(z) = z`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ilab_profile_couette(out: *mut *mut IlabProfile) -> IlabStatus {
    guard(|| new_profile(out, Ok(ShearProfile::couette())))
}

/// `U(z) = tanh(z/d1)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ilab_profile_tanh(d1: f64, out: *mut *mut IlabProfile) -> IlabStatus {
    guard(|| new_profile(out, ShearProfile::tanh_channel(d1)))
}

/// Chebyshev series `U(z) = Σ a_k T_k(z)`.
///
/// # Safety
/// `coefficients` must point to `len` doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ilab_profile_table(coefficients: *const f64, len: usize, out: *mut *mut IlabProfile) -> IlabStatus {
    guard(|| {
        if coefficients.is_null() {
            return Err(null("coefficients"));
        }
        let c = std::slice::from_raw_parts(coefficients, len).to_vec();
        new_profile(out, ShearProfile::chebyshev_table(c))
    })
}

/// # Safety
/// `p` must come from an `ilab_profile_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ilab_profile_free(p: *mut IlabProfile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// `U, U', U'', U'''` at `z` into `out[0..4]`.
///
/// # Safety
/// `p` must be a live profile; `out` must hold 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn ilab_profile_eval(p: *const IlabProfile, z: f64, out: *mut f64) -> IlabStatus {
    guard(|| {
        let p = deref(p, "profile")?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let v = p.0.eval(z);
        std::slice::from_raw_parts_mut(out, 4).copy_from_slice(&v);
        Ok(())
    })
}

/// Evans function `D(c)` of the Rayleigh problem.
///
/// # Safety
/// `p` must be a live profile; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ilab_evans(p: *const IlabProfile, c: IlabComplex, out: *mut IlabComplex) -> IlabStatus {
    guard(|| {
        let p = deref(p, "profile")?;
        let d = core(evans(&p.0, c.into(), &RayleighOptions::default()))?;
        write(out, d.d.into())
    })
}

/// Most unstable wave speed `c₀` in the box (`γ₀ = Im c₀`). Returns
/// `Stable` when the box holds no root.
///
/// # Safety
/// `p` must be a live profile; `c0` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ilab_gamma0_hydro(p: *const IlabProfile, b: IlabBox, c0: *mut IlabComplex) -> IlabStatus {
    guard(|| {
        let p = deref(p, "profile")?;
        let sb = SearchBox::new((b.re_min, b.re_max), (b.im_min, b.im_max));
        let g = core(gamma0_hydro(&p.0, &sb, &RayleighOptions::default()))?;
        write(c0, g.c0.into())
    })
}

// Equilibria

unsafe fn new_equilibrium(
    out: *mut *mut IlabEquilibrium,
    kind: EquilibriumKind,
    dim: u32,
) -> Result<(), (IlabStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    let p = EquilibriumParams { dim: dim as usize, ..EquilibriumParams::default() };
    let e = core(RadialEquilibrium::new(kind, p))?;
    out.write(Box::into_raw(Box::new(IlabEquilibrium(e))));
    Ok(())
}

/// `μ ∝ e^{−|v|²}` in `dim` velocity dimensions.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ilab_equilibrium_maxwellian(dim: u32, out: *mut *mut IlabEquilibrium) -> IlabStatus {
    guard(|| new_equilibrium(out, EquilibriumKind::Maxwellian, dim))
}

/// `μ ∝ exp(−((|v|² − a²)/width)²)` in `dim` velocity dimensions.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ilab_equilibrium_shell(a: f64, width: f64, dim: u32, out: *mut *mut IlabEquilibrium) -> IlabStatus {
    guard(|| new_equilibrium(out, EquilibriumKind::Shell { a, width }, dim))
}

/// # Safety
/// `e` must come from an `ilab_equilibrium_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ilab_equilibrium_free(e: *mut IlabEquilibrium) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Marginal `F(u)` and `F'(u)`.
///
/// # Safety
/// `e` must be a live equilibrium; `f` and `fp` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ilab_marginal_eval(e: *const IlabEquilibrium, u: f64, f: *mut f64, fp: *mut f64) -> IlabStatus {
    guard(|| {
        let e = deref(e, "equilibrium")?;
        write(f, e.0.marginal.eval_f(u))?;
        write(fp, e.0.marginal.eval_fp(u))
    })
}

/// Dispersion function `D(λ)` for `Re λ` above the floor.
///
/// # Safety
/// `e` must be a live equilibrium; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ilab_dispersion(
    e: *const IlabEquilibrium,
    lambda: IlabComplex,
    kernel: IlabKernel,
    out: *mut IlabComplex,
) -> IlabStatus {
    guard(|| {
        let e = deref(e, "equilibrium")?;
        let d = core(dispersion(&e.0.marginal, lambda.into(), kernel.into(), &PenroseOptions::default()))?;
        write(out, d.into())
    })
}

/// Root `λ₀` of largest real part in the box (`γ₀ = Re λ₀`). Returns
/// `Stable` when the box holds no root.
///
/// # Safety
/// `e` must be a live equilibrium; `lambda0` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ilab_gamma0_kinetic(
    e: *const IlabEquilibrium,
    b: IlabBox,
    kernel: IlabKernel,
    lambda0: *mut IlabComplex,
) -> IlabStatus {
    guard(|| {
        let e = deref(e, "equilibrium")?;
        let rect = Rect::new((b.re_min, b.re_max), (b.im_min, b.im_max));
        let g = core(gamma0_kinetic(&e.0.marginal, &rect, kernel.into(), &RootOptions::default(), &PenroseOptions::default()))?;
        write(lambda0, g.lambda0.into())
    })
}

/// Derived oscillatory-data parameters; `Admissibility` names the violated inequality.
///
/// # Safety
/// `req` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ilab_select_parameters(req: *const IlabParamRequest, out: *mut IlabParams) -> IlabStatus {
    guard(|| {
        let r = deref(req, "request")?;
        let full = ParamRequest {
            s: r.s,
            alpha: r.alpha,
            k: r.k,
            d: r.d,
            m: r.m,
            big_m: r.big_m,
            beta: r.beta,
            lambda0: r.lambda0.into(),
            k0: r.k0,
            gamma: r.gamma,
            delta0_prime: r.delta0_prime,
            eps_list: vec![r.eps],
            ..ParamRequest::default()
        };
        let p = core(select_parameters(&full))?;
        let s = p.schedule[0];
        write(
            out,
            IlabParams {
                alpha_prime: p.alpha_prime,
                kappa: p.kappa,
                gamma1: p.gamma1,
                delta0: s.delta0,
                s_eps: s.s_eps,
                t_eps: s.t_eps,
                predicted_exponent: p.predicted_exponent,
            },
        )
    })
}
