//! C interface to the simulator, the controller costs and the GP surrogate.
//!
//! Every fallible function returns a [`SimboStatus`]; on failure the
//! message is available from [`simbo_last_error`] on the same thread.
//! Handles are opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use simbo::bo::expected_improvement;
use simbo::control::{cost_hardware, rollout, ControllerDims, ParamSpace, SpeedProfile};
use simbo::gp::{GpModel, KernelSpec, KernelVariant, PriorMean};
use simbo::sim::{Fidelity, RobotModel, SimConfig};
use simbo::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimboStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Divergence = 3,
    Numerical = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimboFidelity {
    L0 = 0,
    L1 = 1,
    L2 = 2,
}

impl From<SimboFidelity> for Fidelity {
    fn from(f: SimboFidelity) -> Self {
        match f {
            SimboFidelity::L0 => Fidelity::L0Hardware,
            SimboFidelity::L1 => Fidelity::L1SimpleGear,
            SimboFidelity::L2 => Fidelity::L2NoBoom,
        }
    }
}

/// Outcome of one controller rollout.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimboRollout {
    pub cost: f64,
    pub walked: bool,
    pub t_sim: f64,
    pub steps: usize,
    /// Forward CoM displacement, m.
    pub distance: f64,
}

/// Robot description and simulator settings.
pub struct SimboModel {
    model: RobotModel,
    sim: SimConfig,
}

/// GP surrogate over unit-cube points with an SE kernel.
pub struct SimboGp {
    gp: GpModel,
    dim: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SimboStatus {
    match e {
        Error::Divergence { .. } => SimboStatus::Divergence,
        Error::Cholesky { .. } | Error::NonFiniteTransform { .. } | Error::Training(_) => SimboStatus::Numerical,
        Error::Io { .. } | Error::MissingArtifact(_) => SimboStatus::Io,
        _ => SimboStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), SimboStatus>) -> SimboStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SimboStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside simbo".into());
            SimboStatus::Panic
        }
    }
}

fn fail(e: Error) -> SimboStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> SimboStatus {
    set_error(format!("{what} is null"));
    SimboStatus::NullPointer
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length, 0 when none.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn simbo_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            // SAFETY: caller guarantees `len` writable bytes at `buf`.
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Default 60 kg biped with default simulator settings. Never null.
#[no_mangle]
pub extern "C" fn simbo_model_new() -> *mut SimboModel {
    Box::into_raw(Box::new(SimboModel {
        model: RobotModel::default(),
        sim: SimConfig::default(),
    }))
}

/// # Safety
/// `model` must be null or a handle from [`simbo_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn simbo_model_free(model: *mut SimboModel) {
    if !model.is_null() {
        // SAFETY: handle came from Box::into_raw in simbo_model_new.
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Number of unit-cube coordinates for a 5- or 9-parameter controller.
#[no_mangle]
pub extern "C" fn simbo_param_dim(dims: u32) -> usize {
    match dims {
        5 => 5,
        9 => 9,
        _ => 0,
    }
}

/// Roll out the reactive controller at unit-cube point `u` (length 5 or 9)
/// for `horizon` seconds at a constant 0.4 m/s target and score it with the
/// hardware cost.
///
/// # Safety
/// `model` must be a live handle, `u` must point to `n` readable doubles and
/// `out` to one writable [`SimboRollout`].
#[no_mangle]
pub unsafe extern "C" fn simbo_rollout(
    model: *const SimboModel,
    fidelity: SimboFidelity,
    u: *const f64,
    n: usize,
    horizon: f64,
    out: *mut SimboRollout,
) -> SimboStatus {
    guard(|| {
        if model.is_null() {
            return Err(null("model"));
        }
        if u.is_null() {
            return Err(null("u"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: checked non-null; caller guarantees validity.
        let (m, u) = unsafe { (&*model, slice::from_raw_parts(u, n)) };
        let dims = match n {
            5 => ControllerDims::Five,
            9 => ControllerDims::Nine,
            _ => return Err(fail(Error::InvalidConfig(format!("expected 5 or 9 parameters, got {n}")))),
        };
        let space = ParamSpace::new(dims, 0, m.model.nominal_com_height);
        let params = space.params(u).map_err(fail)?;
        let profile = SpeedProfile::constant(0.4);
        let cfg = m.sim.clone().with_fidelity(fidelity.into()).with_horizon(horizon);
        cfg.validate().map_err(fail)?;
        let traj = rollout(&params, &profile, &m.model, &cfg).map_err(fail)?;
        let r = SimboRollout {
            cost: cost_hardware(&traj, &profile),
            walked: traj.walked(),
            t_sim: traj.t_sim(),
            steps: traj.step_count(),
            distance: traj.distance(),
        };
        // SAFETY: checked non-null.
        unsafe { *out = r };
        Ok(())
    })
}

/// Empty SE-kernel GP over `dim`-dimensional points with default
/// hyperparameters. Null when `dim` is 0.
#[no_mangle]
pub extern "C" fn simbo_gp_new(dim: usize) -> *mut SimboGp {
    if dim == 0 {
        set_error("dimension must be positive".into());
        return ptr::null_mut();
    }
    let gp = GpModel::new(KernelSpec::new(KernelVariant::Se, dim), PriorMean::Constant);
    Box::into_raw(Box::new(SimboGp { gp, dim }))
}

/// # Safety
/// `gp` must be null or a handle from [`simbo_gp_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn simbo_gp_free(gp: *mut SimboGp) {
    if !gp.is_null() {
        // SAFETY: handle came from Box::into_raw in simbo_gp_new.
        drop(unsafe { Box::from_raw(gp) });
    }
}

/// # Safety
/// `gp` must be a live handle and `x` must point to `dim` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn simbo_gp_add(gp: *mut SimboGp, x: *const f64, dim: usize, y: f64) -> SimboStatus {
    guard(|| {
        if gp.is_null() {
            return Err(null("gp"));
        }
        if x.is_null() {
            return Err(null("x"));
        }
        // SAFETY: checked non-null; caller guarantees validity.
        let g = unsafe { &mut *gp };
        if dim != g.dim {
            return Err(fail(Error::Shape {
                expected: g.dim,
                got: dim,
            }));
        }
        if !y.is_finite() {
            return Err(fail(Error::InvalidConfig("target must be finite".into())));
        }
        // SAFETY: caller guarantees `dim` doubles.
        let x = unsafe { slice::from_raw_parts(x, dim) }.to_vec();
        g.gp.add(x, y).map_err(fail)
    })
}

/// Number of training points held by `gp`, 0 for null.
///
/// # Safety
/// `gp` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn simbo_gp_len(gp: *const SimboGp) -> usize {
    // SAFETY: caller guarantees validity when non-null.
    unsafe { gp.as_ref() }.map_or(0, |g| g.gp.len())
}

/// Posterior mean and variance at `x`.
///
/// # Safety
/// `gp` must be a live handle, `x` must point to `dim` readable doubles and
/// `mean`, `var` to one writable double each.
#[no_mangle]
pub unsafe extern "C" fn simbo_gp_posterior(
    gp: *const SimboGp,
    x: *const f64,
    dim: usize,
    mean: *mut f64,
    var: *mut f64,
) -> SimboStatus {
    guard(|| {
        if gp.is_null() {
            return Err(null("gp"));
        }
        if x.is_null() || mean.is_null() || var.is_null() {
            return Err(null("x, mean or var"));
        }
        // SAFETY: checked non-null; caller guarantees validity.
        let g = unsafe { &*gp };
        if dim != g.dim {
            return Err(fail(Error::Shape {
                expected: g.dim,
                got: dim,
            }));
        }
        // SAFETY: caller guarantees `dim` doubles.
        let x = unsafe { slice::from_raw_parts(x, dim) };
        let (m, v) = g.gp.posterior(x).map_err(fail)?;
        // SAFETY: checked non-null.
        unsafe {
            *mean = m;
            *var = v;
        }
        Ok(())
    })
}

/// Expected improvement below `best` of a normal with the given moments.
#[no_mangle]
pub extern "C" fn simbo_expected_improvement(mean: f64, variance: f64, best: f64) -> f64 {
    expected_improvement(mean, variance, best)
}
