//! C ABI for `skewdim`.
//!
//! Every fallible call returns a [`SkewdimStatus`]; results go through out
//! pointers. Models and curves are opaque handles released with their
//! `_free` function. The message of the last failure on the calling thread
//! is available from [`skewdim_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use skewdim::{
    gamma_extremes, pressure_collocation_adaptive, pressure_transfer, solve_dq, trace_curve, zeroset_scan, Backend,
    Collocation, CurvePoint, Error, ErrorClass, FibreParams, Forcing, Model, PotentialWindow, PressureResult,
    PullbackSettings, SolverSettings,
};

/// Status codes. The error classes match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkewdimStatus {
    Ok = 0,
    /// A required pointer was null.
    NullArgument = 1,
    /// Invalid parameters or a degenerate configuration.
    Config = 2,
    /// A numerical method did not converge.
    Numeric = 3,
    /// A size or work budget was exceeded.
    Resource = 4,
    /// The library panicked; this is a bug.
    Internal = 5,
}

/// Model parameters plus solver settings.
pub struct SkewdimModel {
    model: Model,
    settings: SolverSettings,
}

/// A traced curve.
pub struct SkewdimCurve {
    points: Vec<CurvePoint>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SkewdimPressure {
    pub value: f64,
    pub dq_dq: f64,
    pub dq_ddelta: f64,
    /// Window length, or nodes per panel for collocation.
    pub resolution: u64,
    pub iterations: u64,
    pub est_error: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SkewdimGamma {
    pub gamma_c: f64,
    pub gamma_min_est: f64,
    pub gamma_max_est: f64,
    pub witness_min_len: u64,
    pub witness_max_len: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SkewdimPoint {
    pub t: f64,
    pub d: f64,
    pub q: f64,
    pub residual_q: f64,
    pub residual_dqdq: f64,
    pub window: u64,
    pub mu_u: f64,
    pub slope: f64,
    pub converged: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SkewdimZeroSet {
    pub zero: u64,
    pub positive: u64,
    pub undetermined: u64,
    pub fraction_zero: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> SkewdimStatus {
    match err.class() {
        ErrorClass::Config => SkewdimStatus::Config,
        ErrorClass::Numeric => SkewdimStatus::Numeric,
        ErrorClass::Resource => SkewdimStatus::Resource,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> SkewdimStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SkewdimStatus::Ok,
        Ok(Err(Fail::Null(name))) => {
            set_error(format!("{name} must not be null"));
            SkewdimStatus::NullArgument
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            SkewdimStatus::Internal
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(name))
}

unsafe fn input<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(name))
}

fn pressure_out(r: &PressureResult) -> SkewdimPressure {
    SkewdimPressure {
        value: r.value,
        dq_dq: r.dq_dq,
        dq_ddelta: r.dq_ddelta,
        resolution: r.m as u64,
        iterations: r.power_iterations as u64,
        est_error: r.est_error,
    }
}

fn point_out(p: &CurvePoint) -> SkewdimPoint {
    SkewdimPoint {
        t: p.t,
        d: p.d,
        q: p.q,
        residual_q: p.residual_q,
        residual_dqdq: p.residual_dqdq,
        window: p.window as u64,
        mu_u: p.mu_u,
        slope: p.slope,
        converged: p.converged,
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn skewdim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn skewdim_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// Create a model with `g(v) = c + cos(2 pi v)` and default solver settings.
///
/// # Safety
/// `model_out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn skewdim_model_new(a: f64, c: f64, model_out: *mut *mut SkewdimModel) -> SkewdimStatus {
    guard(|| {
        let slot = out(model_out, "model_out")?;
        let model = Model::new(a, Forcing::cosine(c)?)?;
        *slot = Box::into_raw(Box::new(SkewdimModel { model, settings: SolverSettings::default() }));
        Ok(())
    })
}

/// Release a model. Null is ignored.
///
/// # Safety
/// `model` must come from [`skewdim_model_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn skewdim_model_free(model: *mut SkewdimModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Set the Newton and resolution-agreement tolerances, and the backend
/// (`0` collocation, `1` transfer windows).
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn skewdim_model_configure(
    model: *mut SkewdimModel,
    newton_tol: f64,
    win_tol: f64,
    backend: u32,
) -> SkewdimStatus {
    guard(|| {
        let m = out(model, "model")?;
        let backend = match backend {
            0 => Backend::Collocation,
            1 => Backend::Window,
            other => return Err(Error::InvalidParameter(format!("unknown backend {other}")).into()),
        };
        let settings = SolverSettings { newton_tol, win_tol, backend, ..m.settings };
        settings.validate()?;
        m.settings = settings;
        Ok(())
    })
}

/// `gamma_c` and the periodic-orbit extremes up to `max_period`.
///
/// # Safety
/// `model` must be null or a live handle; `result` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn skewdim_gamma(
    model: *const SkewdimModel,
    max_period: u64,
    result: *mut SkewdimGamma,
) -> SkewdimStatus {
    guard(|| {
        let m = input(model, "model")?;
        let slot = out(result, "result")?;
        let g = gamma_extremes(m.model.a, &m.model.forcing, max_period as usize)?;
        *slot = SkewdimGamma {
            gamma_c: g.gamma_c,
            gamma_min_est: g.gamma_min_est,
            gamma_max_est: g.gamma_max_est,
            witness_min_len: g.witness_min.len() as u64,
            witness_max_len: g.witness_max.len() as u64,
        };
        Ok(())
    })
}

/// `Q(delta, q, t)` from the transfer matrix on `m`-windows.
///
/// # Safety
/// `model` must be null or a live handle; `result` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn skewdim_pressure_window(
    model: *const SkewdimModel,
    m: u64,
    q: f64,
    delta: f64,
    t: f64,
    result: *mut SkewdimPressure,
) -> SkewdimStatus {
    guard(|| {
        let md = input(model, "model")?;
        let slot = out(result, "result")?;
        let win = PotentialWindow::new(m as usize, md.model.a, md.model.forcing)?;
        *slot = pressure_out(&pressure_transfer(q, delta, t, &win)?);
        Ok(())
    })
}

/// `Q(delta, q, t)` from collocation, refined until successive resolutions
/// agree to the model's `win_tol`.
///
/// # Safety
/// `model` must be null or a live handle; `result` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn skewdim_pressure(
    model: *const SkewdimModel,
    q: f64,
    delta: f64,
    t: f64,
    result: *mut SkewdimPressure,
) -> SkewdimStatus {
    guard(|| {
        let md = input(model, "model")?;
        let slot = out(result, "result")?;
        let s = &md.settings;
        let grid = Collocation::new(md.model.a, md.model.forcing, s.nodes_start)?;
        *slot = pressure_out(&pressure_collocation_adaptive(q, delta, t, s.win_tol, &grid, s.nodes_step, s.nodes_max)?);
        Ok(())
    })
}

/// Solve for `(D, q)` at `t` from the seed `(init_d, init_q)`.
///
/// # Safety
/// `model` must be null or a live handle; `result` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn skewdim_solve(
    model: *const SkewdimModel,
    t: f64,
    init_d: f64,
    init_q: f64,
    result: *mut SkewdimPoint,
) -> SkewdimStatus {
    guard(|| {
        let md = input(model, "model")?;
        let slot = out(result, "result")?;
        *slot = point_out(&solve_dq(t, init_d, init_q, &md.model, &md.settings)?);
        Ok(())
    })
}

/// Trace `D(t)` over `len` grid values by continuation from `gamma_c`.
/// Points that fail are kept with `converged = false`.
///
/// # Safety
/// `grid` must point to `len` readable doubles; `curve_out` must be null or
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn skewdim_trace(
    model: *const SkewdimModel,
    grid: *const f64,
    len: u64,
    curve_out: *mut *mut SkewdimCurve,
) -> SkewdimStatus {
    guard(|| {
        let md = input(model, "model")?;
        let slot = out(curve_out, "curve_out")?;
        if grid.is_null() {
            return Err(Fail::Null("grid"));
        }
        let grid = std::slice::from_raw_parts(grid, len as usize);
        let gc = skewdim::gamma_c(md.model.a, &md.model.forcing)?;
        let points = trace_curve(grid, &md.model, &md.settings, gc, None)?;
        *slot = Box::into_raw(Box::new(SkewdimCurve { points }));
        Ok(())
    })
}

/// Number of points in a curve; 0 for null.
///
/// # Safety
/// `curve` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn skewdim_curve_len(curve: *const SkewdimCurve) -> u64 {
    curve.as_ref().map_or(0, |c| c.points.len() as u64)
}

/// Copy point `index` of a curve.
///
/// # Safety
/// `curve` must be null or a live handle; `result` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn skewdim_curve_point(
    curve: *const SkewdimCurve,
    index: u64,
    result: *mut SkewdimPoint,
) -> SkewdimStatus {
    guard(|| {
        let c = input(curve, "curve")?;
        let slot = out(result, "result")?;
        let p = c
            .points
            .get(index as usize)
            .ok_or_else(|| Error::InvalidParameter(format!("index {index} out of range for {} points", c.points.len())))?;
        *slot = point_out(p);
        Ok(())
    })
}

/// Release a curve. Null is ignored.
///
/// # Safety
/// `curve` must come from [`skewdim_trace`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn skewdim_curve_free(curve: *mut SkewdimCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Classify `samples` Lebesgue-random points at `t` with `n` pullback steps.
///
/// # Safety
/// `model` must be null or a live handle; `result` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn skewdim_zeroset(
    model: *const SkewdimModel,
    t: f64,
    samples: u64,
    n: u64,
    seed: u64,
    result: *mut SkewdimZeroSet,
) -> SkewdimStatus {
    guard(|| {
        let md = input(model, "model")?;
        let slot = out(result, "result")?;
        let params = FibreParams::new(md.model.a, t, md.model.forcing)?;
        let s = zeroset_scan(&params, samples as usize, n as usize, seed, &PullbackSettings::default())?;
        *slot = SkewdimZeroSet {
            zero: s.zero as u64,
            positive: s.positive as u64,
            undetermined: s.undetermined as u64,
            fraction_zero: s.fraction_zero,
        };
        Ok(())
    })
}
