//! C ABI over the pelletctl library: opaque handles, status codes, and a
//! flat accessor surface suitable for binding from other languages.
//!
//! Ownership rules: every `*_new`/`*_simulate` that returns a handle through
//! an out-pointer transfers ownership to the caller, who must release it with
//! the matching `*_free`. Handles are not thread-safe; share them only with
//! external synchronization. All functions tolerate NULL out-pointers for
//! values the caller does not need, but never NULL handles.

use pelletctl::params::{ParamError, SystemParams, ValidatedParams};
use pelletctl::simulator::{simulate, SimOptions};
use pelletctl::verifier::{
    check_contraction, check_dwell_and_pellet_gaps, check_envelope, check_ultimate_bound,
    envelope_unchecked, VerifyError,
};
use pelletctl::{JumpKind, Trajectory};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PelletctlStatus {
    Ok = 0,
    /// A parameter violates its validity constraint.
    InvalidParam = 1,
    /// A NULL handle or otherwise unusable argument was passed.
    InvalidArgument = 2,
    /// The slot period exceeds the admissible maximum.
    ActuatorTooSlow = 3,
    /// The simulation rejected its inputs.
    SimulationFailed = 4,
    /// The horizon is too short for the requested verification.
    HorizonTooShort = 5,
    /// An index is out of range.
    OutOfRange = 6,
}

/// Jump classification in trajectory accessors.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PelletctlJumpKind {
    Skip = 0,
    Pellet = 1,
}

/// Opaque validated parameter set.
pub struct PelletctlParams {
    inner: ValidatedParams,
}

/// Opaque closed-loop trajectory.
pub struct PelletctlTrajectory {
    inner: Trajectory,
}

fn param_status(e: &ParamError) -> PelletctlStatus {
    match e {
        ParamError::ActuatorTooSlow { .. } => PelletctlStatus::ActuatorTooSlow,
        _ => PelletctlStatus::InvalidParam,
    }
}

unsafe fn write_opt<T>(ptr: *mut T, value: T) {
    if !ptr.is_null() {
        unsafe { ptr.write(value) };
    }
}

/// Validate a parameter set and return a handle through `out`.
///
/// # Safety
/// `out` must be a valid pointer. On `Ok` the caller owns the handle and must
/// release it with [`pelletctl_params_free`].
#[no_mangle]
pub unsafe extern "C" fn pelletctl_params_new(
    tau: f64,
    r: f64,
    alpha: f64,
    t_c: f64,
    delta: f64,
    out: *mut *mut PelletctlParams,
) -> PelletctlStatus {
    if out.is_null() {
        return PelletctlStatus::InvalidArgument;
    }
    match SystemParams::new(tau, r, alpha, t_c, delta).validate() {
        Ok(inner) => {
            let handle = Box::new(PelletctlParams { inner });
            unsafe { out.write(Box::into_raw(handle)) };
            PelletctlStatus::Ok
        }
        Err(e) => param_status(&e),
    }
}

/// Release a parameter handle. NULL is a no-op.
///
/// # Safety
/// `params` must be a handle obtained from [`pelletctl_params_new`] that has
/// not been freed already.
#[no_mangle]
pub unsafe extern "C" fn pelletctl_params_free(params: *mut PelletctlParams) {
    if !params.is_null() {
        drop(unsafe { Box::from_raw(params) });
    }
}

/// Query the design bounds: contraction ratio, dwell bound, maximum slot
/// period and maximum threshold. Any out-pointer may be NULL.
///
/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pelletctl_bounds(
    params: *const PelletctlParams,
    out_gamma: *mut f64,
    out_tau_d: *mut f64,
    out_t_c_max: *mut f64,
    out_delta_max: *mut f64,
) -> PelletctlStatus {
    let Some(handle) = (unsafe { params.as_ref() }) else {
        return PelletctlStatus::InvalidArgument;
    };
    let p = &handle.inner;
    unsafe {
        write_opt(out_gamma, p.gamma());
        write_opt(out_tau_d, p.tau_d());
        write_opt(out_t_c_max, p.tc_upper_bound());
    }
    if !out_delta_max.is_null() {
        match p.delta_upper_bound() {
            Ok(d) => unsafe { out_delta_max.write(d) },
            Err(e) => return param_status(&e),
        }
    }
    PelletctlStatus::Ok
}

/// Run the closed loop from error `x0` over `horizon` seconds and return the
/// trajectory through `out`.
///
/// # Safety
/// `params` must be a live handle and `out` a valid pointer. On `Ok` the
/// caller owns the trajectory and must release it with
/// [`pelletctl_trajectory_free`].
#[no_mangle]
pub unsafe extern "C" fn pelletctl_simulate(
    params: *const PelletctlParams,
    x0: f64,
    horizon: f64,
    out: *mut *mut PelletctlTrajectory,
) -> PelletctlStatus {
    let Some(handle) = (unsafe { params.as_ref() }) else {
        return PelletctlStatus::InvalidArgument;
    };
    if out.is_null() {
        return PelletctlStatus::InvalidArgument;
    }
    match simulate(&handle.inner, x0, horizon, &SimOptions::default()) {
        Ok(inner) => {
            unsafe { out.write(Box::into_raw(Box::new(PelletctlTrajectory { inner }))) };
            PelletctlStatus::Ok
        }
        Err(_) => PelletctlStatus::SimulationFailed,
    }
}

/// Release a trajectory handle. NULL is a no-op.
///
/// # Safety
/// `traj` must be a handle obtained from [`pelletctl_simulate`] that has not
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn pelletctl_trajectory_free(traj: *mut PelletctlTrajectory) {
    if !traj.is_null() {
        drop(unsafe { Box::from_raw(traj) });
    }
}

/// Number of jumps (slot decisions) in the trajectory.
///
/// # Safety
/// `traj` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pelletctl_trajectory_jump_count(
    traj: *const PelletctlTrajectory,
) -> usize {
    unsafe { traj.as_ref() }.map_or(0, |t| t.inner.jumps.len())
}

/// Fetch one jump record by index. Any out-pointer may be NULL.
///
/// # Safety
/// `traj` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pelletctl_trajectory_jump(
    traj: *const PelletctlTrajectory,
    index: usize,
    out_time: *mut f64,
    out_kind: *mut PelletctlJumpKind,
    out_x_before: *mut f64,
    out_x_after: *mut f64,
) -> PelletctlStatus {
    let Some(handle) = (unsafe { traj.as_ref() }) else {
        return PelletctlStatus::InvalidArgument;
    };
    let Some(e) = handle.inner.jumps.get(index) else {
        return PelletctlStatus::OutOfRange;
    };
    unsafe {
        write_opt(out_time, e.time);
        write_opt(
            out_kind,
            match e.kind {
                JumpKind::Skip => PelletctlJumpKind::Skip,
                JumpKind::Pellet => PelletctlJumpKind::Pellet,
            },
        );
        write_opt(out_x_before, e.state_before.x);
        write_opt(out_x_after, e.state_after.x);
    }
    PelletctlStatus::Ok
}

/// Evaluate the trajectory state at continuous time `t`. `out_xi` may be
/// NULL. At a jump instant the post-jump state is returned.
///
/// # Safety
/// `traj` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pelletctl_trajectory_state_at(
    traj: *const PelletctlTrajectory,
    t: f64,
    out_x: *mut f64,
    out_xi: *mut f64,
) -> PelletctlStatus {
    let Some(handle) = (unsafe { traj.as_ref() }) else {
        return PelletctlStatus::InvalidArgument;
    };
    let inner = &handle.inner;
    // later arcs win at shared endpoints, giving post-jump values
    let arc = inner
        .arcs
        .iter()
        .rev()
        .find(|a| t >= a.t_start && t <= a.t_end);
    let Some(arc) = arc else {
        return PelletctlStatus::OutOfRange;
    };
    let q = arc.state_at(t - arc.t_start, &inner.params);
    unsafe {
        write_opt(out_x, q.x);
        write_opt(out_xi, q.xi);
    }
    PelletctlStatus::Ok
}

/// Evaluate the analytic bound envelope at time `t`. Either out-pointer may
/// be NULL.
///
/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pelletctl_envelope_at(
    params: *const PelletctlParams,
    x0: f64,
    t: f64,
    out_lower: *mut f64,
    out_upper: *mut f64,
) -> PelletctlStatus {
    let Some(handle) = (unsafe { params.as_ref() }) else {
        return PelletctlStatus::InvalidArgument;
    };
    let env = envelope_unchecked(&handle.inner, x0);
    unsafe {
        write_opt(out_lower, env.lower(t));
        write_opt(out_upper, env.upper(t));
    }
    PelletctlStatus::Ok
}

/// Run the full verification battery on a trajectory. `out_passed` receives
/// 1 when every check holds, 0 otherwise.
///
/// # Safety
/// `traj` must be a live handle and `out_passed` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pelletctl_verify(
    traj: *const PelletctlTrajectory,
    settle_tol: f64,
    out_passed: *mut i32,
) -> PelletctlStatus {
    let Some(handle) = (unsafe { traj.as_ref() }) else {
        return PelletctlStatus::InvalidArgument;
    };
    if out_passed.is_null() {
        return PelletctlStatus::InvalidArgument;
    }
    let inner = &handle.inner;
    let mut report = check_envelope(inner);
    report.merge(check_dwell_and_pellet_gaps(inner));
    report.merge(check_contraction(inner));
    match check_ultimate_bound(inner, settle_tol) {
        Ok(r) => report.merge(r),
        Err(VerifyError::HorizonTooShort { .. }) => return PelletctlStatus::HorizonTooShort,
        Err(_) => return PelletctlStatus::InvalidParam,
    }
    unsafe { out_passed.write(report.all_passed() as i32) };
    PelletctlStatus::Ok
}
