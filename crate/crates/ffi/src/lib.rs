//! C ABI for the logistic-bandit library.
//!
//! Everything crosses the boundary through opaque handles ([`lb_instance`],
//! [`lb_history`], [`lb_confidence`]) and flat `double` buffers. Fallible
//! calls return an [`lb_status`]; on any non-OK status the failing call
//! leaves a human-readable explanation in [`lb_last_error_message`].
//! `include/logbandit.h` is generated from this file by the build script.
//!
//! Conventions:
//!
//! * Output buffers are caller-allocated; length requirements are stated per
//!   function (usually `dim` doubles, with `dim` known from the handle).
//! * Outputs documented as optional may be `NULL` and are then skipped.
//! * Each handle is destroyed exactly once by its `_free` function, which
//!   accepts `NULL` as a no-op. Handles are not thread-safe; confine each
//!   one to a single thread or lock around it.
//! * Panics never unwind across the boundary: they are caught and surfaced
//!   as [`lb_status::LB_PANIC`].

// Types are named for the C header they generate, not for Rust style.
#![allow(non_camel_case_types)]

use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{self, AssertUnwindSafe};
use std::{cell::RefCell, slice};

use nalgebra::DVector;

use logbandit::confidence::ConfidenceState;
use logbandit::estimation::{fit_mle, History, MleOptions, RegSchedule};
use logbandit::logistic::logistic;
use logbandit::planning::{plan_ball, plan_finite, SolverOpts};
use logbandit::problem::{kappa_summary, Arm, ArmSet, ProblemInstance};
use logbandit::sim::policies::{BestFixed, EpsGreedy, GlmUcb, OfuLogR};
use logbandit::sim::{run_episode, EpisodeOptions, Policy};
use logbandit::Error;

/// Status code returned by every fallible call.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum lb_status {
    /// Success.
    LB_OK = 0,
    /// A required pointer argument was `NULL`.
    LB_NULL_POINTER = 1,
    /// An argument failed validation (non-finite, out of range, unknown
    /// name, norm above the unit ball, ...).
    LB_INVALID_ARGUMENT = 2,
    /// Vector or handle dimensions disagree.
    LB_DIMENSION_MISMATCH = 3,
    /// The computation itself failed; see `lb_last_error_message`.
    LB_RUNTIME_ERROR = 4,
    /// A panic was caught at the boundary. State behind the involved
    /// handles may be inconsistent; freeing them is the only safe next use.
    LB_PANIC = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl ToString) {
    // Interior NULs cannot survive the CString round-trip; blank them.
    let raw = msg.to_string().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(raw).unwrap_or_default());
}

/// Records a library error and picks the status code for its category.
fn core_err(err: Error) -> lb_status {
    let code = match &err {
        Error::Dimension { .. } => lb_status::LB_DIMENSION_MISMATCH,
        Error::NonFinite { .. }
        | Error::Domain { .. }
        | Error::ArmNorm { .. }
        | Error::EmptyArmSet
        | Error::Mismatch { .. }
        | Error::Config { .. } => lb_status::LB_INVALID_ARGUMENT,
        _ => lb_status::LB_RUNTIME_ERROR,
    };
    set_error(err);
    code
}

fn invalid(msg: &str) -> lb_status {
    set_error(msg);
    lb_status::LB_INVALID_ARGUMENT
}

fn null_arg(what: &str) -> lb_status {
    set_error(format!("{what} is NULL"));
    lb_status::LB_NULL_POINTER
}

/// Runs `f`, converting panics to `LB_PANIC` so unwinding never crosses
/// into C.
fn guarded(f: impl FnOnce() -> Result<(), lb_status>) -> lb_status {
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => lb_status::LB_OK,
        Ok(Err(code)) => code,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| (*s).to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            lb_status::LB_PANIC
        }
    }
}

unsafe fn handle<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, lb_status> {
    ptr.as_ref().ok_or_else(|| null_arg(what))
}

unsafe fn handle_mut<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, lb_status> {
    ptr.as_mut().ok_or_else(|| null_arg(what))
}

/// Borrows a caller-provided input of `len` doubles.
unsafe fn read_slice<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], lb_status> {
    if ptr.is_null() {
        return Err(null_arg(what));
    }
    if len == 0 {
        return Err(invalid(&format!("{what} has zero length")));
    }
    Ok(slice::from_raw_parts(ptr, len))
}

/// Copies a vector into a caller-provided output buffer of matching length.
unsafe fn write_vec(ptr: *mut f64, v: &DVector<f64>, what: &str) -> Result<(), lb_status> {
    if ptr.is_null() {
        return Err(null_arg(what));
    }
    slice::from_raw_parts_mut(ptr, v.len()).copy_from_slice(v.as_slice());
    Ok(())
}

unsafe fn write_opt(ptr: *mut f64, value: f64) {
    if !ptr.is_null() {
        *ptr = value;
    }
}

/// A fixed environment: the true parameter, its norm bound, and the arm set.
pub struct lb_instance(ProblemInstance);

/// An append-only record of played arms and binary rewards.
pub struct lb_history(History);

/// A confidence-set snapshot frozen at one round. Bundles the history it
/// was built from because membership tests and planning rescan the data.
pub struct lb_confidence {
    state: ConfidenceState,
    history: History,
}

/// Library version as a static string; never `NULL`, never freed.
#[no_mangle]
pub extern "C" fn lb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Explanation of the most recent failure on the calling thread.
///
/// Empty string when nothing failed yet. The pointer stays valid until the
/// next failing `lb_` call on the same thread; copy it out if you keep it.
#[no_mangle]
pub extern "C" fn lb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// The logistic link `1 / (1 + exp(-z))`, overflow-free for any finite `z`.
#[no_mangle]
pub extern "C" fn lb_logistic(z: f64) -> f64 {
    logistic(z)
}

unsafe fn instance_new(
    theta_star: *const f64,
    dim: usize,
    s_bound: f64,
    arm_set: ArmSet,
    out: *mut *mut lb_instance,
) -> lb_status {
    guarded(|| instance_new_checked(theta_star, dim, s_bound, arm_set, out))
}

/// Creates an environment whose arm set is the full unit ball.
///
/// `theta_star` is `dim` doubles with Euclidean norm at most `s_bound`;
/// `resolution` is the boundary discretization used by grid-based planners
/// and oracles (points per full circle; pass 0 to leave it unset).
#[no_mangle]
pub unsafe extern "C" fn lb_instance_new_ball(
    theta_star: *const f64,
    dim: usize,
    s_bound: f64,
    resolution: u32,
    out: *mut *mut lb_instance,
) -> lb_status {
    let set = ArmSet::UnitBall { dim, resolution: (resolution > 0).then_some(resolution) };
    instance_new(theta_star, dim, s_bound, set, out)
}

/// Creates an environment whose arm set is the unit sphere (boundary only).
/// Arguments as in `lb_instance_new_ball`.
#[no_mangle]
pub unsafe extern "C" fn lb_instance_new_sphere(
    theta_star: *const f64,
    dim: usize,
    s_bound: f64,
    resolution: u32,
    out: *mut *mut lb_instance,
) -> lb_status {
    let set = ArmSet::UnitSphere { dim, resolution: (resolution > 0).then_some(resolution) };
    instance_new(theta_star, dim, s_bound, set, out)
}

/// Creates an environment over an explicit dictionary of `n_arms` arms,
/// given row-major as `n_arms * dim` doubles. Every arm must lie in the
/// unit ball.
#[no_mangle]
pub unsafe extern "C" fn lb_instance_new_finite(
    theta_star: *const f64,
    dim: usize,
    s_bound: f64,
    arms: *const f64,
    n_arms: usize,
    out: *mut *mut lb_instance,
) -> lb_status {
    guarded(|| {
        if dim == 0 {
            return Err(invalid("dim is zero"));
        }
        let flat = read_slice(arms, dim.checked_mul(n_arms).ok_or_else(|| invalid("n_arms * dim overflows"))?, "arms")?;
        let dict: Vec<Arm> = flat
            .chunks_exact(dim)
            .map(|row| Arm::new(row.to_vec()))
            .collect::<Result<_, _>>()
            .map_err(core_err)?;
        // Reuse the shared constructor for theta/out validation.
        instance_new_checked(theta_star, dim, s_bound, ArmSet::Finite(dict), out)
    })
}

// Body shared with `instance_new`, minus the outer panic guard (the caller
// already holds one).
unsafe fn instance_new_checked(
    theta_star: *const f64,
    dim: usize,
    s_bound: f64,
    arm_set: ArmSet,
    out: *mut *mut lb_instance,
) -> Result<(), lb_status> {
    let theta = read_slice(theta_star, dim, "theta_star")?;
    if out.is_null() {
        return Err(null_arg("out"));
    }
    let inst = ProblemInstance::new(theta.to_vec(), s_bound, arm_set).map_err(core_err)?;
    *out = Box::into_raw(Box::new(lb_instance(inst)));
    Ok(())
}

/// Destroys an instance handle. `NULL` is a no-op.
#[no_mangle]
pub unsafe extern "C" fn lb_instance_free(inst: *mut lb_instance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Ambient dimension of the environment; 0 if `inst` is `NULL`.
#[no_mangle]
pub unsafe extern "C" fn lb_instance_dim(inst: *const lb_instance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.dim())
}

/// Flatness constants of the environment, largest first in difficulty:
/// `kappa_global` (worst over the whole parameter ball), `kappa_x` (worst
/// over the arm set at the true parameter), `kappa_star` (at the best arm
/// only). Any output pointer may be `NULL` to skip that value.
#[no_mangle]
pub unsafe extern "C" fn lb_instance_kappas(
    inst: *const lb_instance,
    kappa_star: *mut f64,
    kappa_x: *mut f64,
    kappa_global: *mut f64,
) -> lb_status {
    guarded(|| {
        let inst = handle(inst, "inst")?;
        let k = kappa_summary(&inst.0).map_err(core_err)?;
        write_opt(kappa_star, k.kappa_star);
        write_opt(kappa_x, k.kappa_x);
        write_opt(kappa_global, k.kappa_global);
        Ok(())
    })
}

/// Reward-maximizing arm under the true parameter. `coords` receives `dim`
/// doubles; `value` receives the attained logit `arm . theta_star`. Either
/// output may be `NULL`.
#[no_mangle]
pub unsafe extern "C" fn lb_instance_best_arm(
    inst: *const lb_instance,
    coords: *mut f64,
    value: *mut f64,
) -> lb_status {
    guarded(|| {
        let inst = handle(inst, "inst")?;
        let best = inst.0.best_arm().map_err(core_err)?;
        if !coords.is_null() {
            write_vec(coords, best.arm.coords(), "coords")?;
        }
        write_opt(value, best.value);
        Ok(())
    })
}

/// Creates an empty history for arms of the given dimension.
#[no_mangle]
pub unsafe extern "C" fn lb_history_new(dim: usize, out: *mut *mut lb_history) -> lb_status {
    guarded(|| {
        if dim == 0 {
            return Err(invalid("dim is zero"));
        }
        if out.is_null() {
            return Err(null_arg("out"));
        }
        *out = Box::into_raw(Box::new(lb_history(History::new(dim))));
        Ok(())
    })
}

/// Destroys a history handle. `NULL` is a no-op.
#[no_mangle]
pub unsafe extern "C" fn lb_history_free(h: *mut lb_history) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of recorded rounds; 0 if `h` is `NULL`.
#[no_mangle]
pub unsafe extern "C" fn lb_history_len(h: *const lb_history) -> usize {
    h.as_ref().map_or(0, |h| h.0.len())
}

/// Appends one round: the played arm (`dim` doubles, unit ball) and its
/// binary reward. `reward` must be exactly 0 or 1 — anything else is
/// rejected rather than coerced, to catch sign or scaling bugs early.
#[no_mangle]
pub unsafe extern "C" fn lb_history_push(
    h: *mut lb_history,
    arm: *const f64,
    dim: usize,
    reward: c_int,
) -> lb_status {
    guarded(|| {
        let h = handle_mut(h, "h")?;
        let coords = read_slice(arm, dim, "arm")?;
        if reward != 0 && reward != 1 {
            return Err(invalid(&format!("reward must be 0 or 1, got {reward}")));
        }
        let arm = Arm::new(coords.to_vec()).map_err(core_err)?;
        h.0.push(&arm, reward == 1).map_err(core_err)?;
        Ok(())
    })
}

/// Fits the ridge-regularized logistic MLE on `h` at the given `lambda`.
/// `theta` receives `dim` doubles; `loss` (optional) the attained
/// regularized loss.
#[no_mangle]
pub unsafe extern "C" fn lb_fit_mle(
    h: *const lb_history,
    lambda: f64,
    theta: *mut f64,
    loss: *mut f64,
) -> lb_status {
    guarded(|| {
        let h = handle(h, "h")?;
        let fit = fit_mle(&h.0, lambda, &MleOptions::default(), None).map_err(core_err)?;
        write_vec(theta, &fit.theta, "theta")?;
        write_opt(loss, fit.loss);
        Ok(())
    })
}

/// Builds the confidence-set pair (exact and relaxed) from a history at its
/// current round, using the scheduled regularization for that round.
///
/// `delta` is the confidence level in (0, 1); `s_bound` the parameter-norm
/// bound the radii assume. The handle snapshots the history: later pushes
/// to `h` do not affect it.
#[no_mangle]
pub unsafe extern "C" fn lb_confidence_build(
    h: *const lb_history,
    delta: f64,
    s_bound: f64,
    out: *mut *mut lb_confidence,
) -> lb_status {
    guarded(|| {
        let h = handle(h, "h")?;
        if out.is_null() {
            return Err(null_arg("out"));
        }
        let sched = RegSchedule::new(h.0.dim());
        let state = ConfidenceState::build(&h.0, &sched, delta, s_bound, None).map_err(core_err)?;
        *out = Box::into_raw(Box::new(lb_confidence { state, history: h.0.clone() }));
        Ok(())
    })
}

/// Destroys a confidence handle. `NULL` is a no-op.
#[no_mangle]
pub unsafe extern "C" fn lb_confidence_free(c: *mut lb_confidence) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Round the snapshot acts in: one more than the number of observed
/// rounds, matching the convention that the set built from `t` rounds of
/// data steers the choice at round `t + 1`. 0 if `c` is `NULL`.
#[no_mangle]
pub unsafe extern "C" fn lb_confidence_round(c: *const lb_confidence) -> u64 {
    c.as_ref().map_or(0, |c| c.state.round())
}

/// Parameter dimension; 0 if `c` is `NULL`.
#[no_mangle]
pub unsafe extern "C" fn lb_confidence_dim(c: *const lb_confidence) -> usize {
    c.as_ref().map_or(0, |c| c.state.dim())
}

/// Exact-set radius (gradient metric); NaN if `c` is `NULL`.
#[no_mangle]
pub unsafe extern "C" fn lb_confidence_gamma(c: *const lb_confidence) -> f64 {
    c.as_ref().map_or(f64::NAN, |c| c.state.gamma())
}

/// Relaxed-set radius (`beta`, with loss-gap threshold `beta^2`); NaN if
/// `c` is `NULL`.
#[no_mangle]
pub unsafe extern "C" fn lb_confidence_beta(c: *const lb_confidence) -> f64 {
    c.as_ref().map_or(f64::NAN, |c| c.state.beta())
}

/// Regularization weight in force at the snapshot round; NaN if `c` is
/// `NULL`.
#[no_mangle]
pub unsafe extern "C" fn lb_confidence_lambda(c: *const lb_confidence) -> f64 {
    c.as_ref().map_or(f64::NAN, |c| c.state.lambda())
}

/// Copies the fitted center (the regularized MLE) into `theta` (`dim`
/// doubles).
#[no_mangle]
pub unsafe extern "C" fn lb_confidence_theta_hat(
    c: *const lb_confidence,
    theta: *mut f64,
) -> lb_status {
    guarded(|| {
        let c = handle(c, "c")?;
        write_vec(theta, c.state.theta_hat(), "theta")
    })
}

unsafe fn membership(
    c: *const lb_confidence,
    theta: *const f64,
    dim: usize,
    inside: *mut c_int,
    relaxed: bool,
) -> lb_status {
    guarded(|| {
        let c = handle(c, "c")?;
        let coords = read_slice(theta, dim, "theta")?;
        if inside.is_null() {
            return Err(null_arg("inside"));
        }
        if dim != c.state.dim() {
            set_error(format!("theta has dim {dim}, confidence set has {}", c.state.dim()));
            return Err(lb_status::LB_DIMENSION_MISMATCH);
        }
        let t = DVector::from_column_slice(coords);
        let hit = if relaxed {
            c.state.contains_relaxed(&c.history, &t)
        } else {
            c.state.contains(&c.history, &t)
        }
        .map_err(core_err)?;
        *inside = c_int::from(hit);
        Ok(())
    })
}

/// Tests membership in the exact confidence set (parameter ball plus
/// gradient-metric distance at most gamma). `inside` receives 1 or 0.
#[no_mangle]
pub unsafe extern "C" fn lb_confidence_contains(
    c: *const lb_confidence,
    theta: *const f64,
    dim: usize,
    inside: *mut c_int,
) -> lb_status {
    membership(c, theta, dim, inside, false)
}

/// Tests membership in the relaxed confidence set (parameter ball plus
/// loss gap at most beta^2). The relaxed set contains the exact one.
#[no_mangle]
pub unsafe extern "C" fn lb_confidence_contains_relaxed(
    c: *const lb_confidence,
    theta: *const f64,
    dim: usize,
    inside: *mut c_int,
) -> lb_status {
    membership(c, theta, dim, inside, true)
}

/// Optimistic plan over the unit ball: maximizes `arm . theta` jointly over
/// unit-norm arms and parameters in the relaxed set.
///
/// `arm` receives `dim` doubles (required); `value` the attained logit and
/// `theta` the maximizing parameter (`dim` doubles), both optional.
#[no_mangle]
pub unsafe extern "C" fn lb_plan_ball(
    c: *const lb_confidence,
    arm: *mut f64,
    value: *mut f64,
    theta: *mut f64,
) -> lb_status {
    guarded(|| {
        let c = handle(c, "c")?;
        let plan = plan_ball(&c.history, &c.state, None, &SolverOpts::default()).map_err(core_err)?;
        write_vec(arm, plan.arm.coords(), "arm")?;
        write_opt(value, plan.value);
        if !theta.is_null() {
            write_vec(theta, &plan.theta, "theta")?;
        }
        Ok(())
    })
}

/// Optimistic plan over an explicit dictionary (`n_arms * dim` doubles,
/// row-major, `dim` from the confidence handle): maximizes `arm . theta`
/// over arms and parameters in the relaxed set.
///
/// `index` receives the winning row (required); `value` the attained
/// logit, optional.
#[no_mangle]
pub unsafe extern "C" fn lb_plan_finite(
    c: *const lb_confidence,
    arms: *const f64,
    n_arms: usize,
    index: *mut usize,
    value: *mut f64,
) -> lb_status {
    guarded(|| {
        let c = handle(c, "c")?;
        let dim = c.state.dim();
        let flat = read_slice(arms, dim.checked_mul(n_arms).ok_or_else(|| invalid("n_arms * dim overflows"))?, "arms")?;
        if index.is_null() {
            return Err(null_arg("index"));
        }
        let dict: Vec<Arm> = flat
            .chunks_exact(dim)
            .map(|row| Arm::new(row.to_vec()))
            .collect::<Result<_, _>>()
            .map_err(core_err)?;
        let plan = plan_finite(&c.history, &c.state, &dict, None, &SolverOpts::default())
            .map_err(core_err)?;
        let Some(i) = plan.arm_index else {
            set_error("planner returned no index for a finite dictionary");
            return Err(lb_status::LB_RUNTIME_ERROR);
        };
        *index = i;
        write_opt(value, plan.value);
        Ok(())
    })
}

/// Simulates one bandit episode and reports cumulative expected regret.
///
/// `policy` selects the algorithm by name: `"ofulog-r"` (optimistic
/// planning over the relaxed set), `"glm-ucb"` (classic UCB paying the
/// global flatness constant), `"eps-greedy"` (0.1-greedy), or
/// `"best-fixed"` (oracle arm every round). `final_regret` (optional)
/// receives the regret after `horizon` rounds; `regret_series` (optional)
/// must hold `horizon` doubles and receives the cumulative regret at every
/// round. Rewards are drawn from a deterministic generator seeded with
/// `seed`; identical inputs reproduce identical output bit-for-bit.
#[no_mangle]
pub unsafe extern "C" fn lb_episode_run(
    inst: *const lb_instance,
    policy: *const c_char,
    horizon: u64,
    seed: u64,
    delta: f64,
    final_regret: *mut f64,
    regret_series: *mut f64,
) -> lb_status {
    guarded(|| {
        let inst = handle(inst, "inst")?;
        if policy.is_null() {
            return Err(null_arg("policy"));
        }
        let name = CStr::from_ptr(policy)
            .to_str()
            .map_err(|_| invalid("policy name is not valid UTF-8"))?;
        let mut boxed: Box<dyn Policy> = match name {
            "ofulog-r" => Box::new(OfuLogR::new()),
            "glm-ucb" => {
                let k = kappa_summary(&inst.0).map_err(core_err)?;
                Box::new(GlmUcb::new(k.kappa_global))
            }
            "eps-greedy" => Box::new(EpsGreedy::new(0.1)),
            "best-fixed" => Box::new(BestFixed::for_instance(&inst.0).map_err(core_err)?),
            other => {
                return Err(invalid(&format!(
                    "unknown policy `{other}`; expected ofulog-r, glm-ucb, eps-greedy, or best-fixed"
                )))
            }
        };
        let opts = EpisodeOptions::new(horizon, seed, delta).without_trajectory();
        let record = run_episode(boxed.as_mut(), &inst.0, &opts).map_err(core_err)?;
        write_opt(final_regret, record.final_regret);
        if !regret_series.is_null() {
            slice::from_raw_parts_mut(regret_series, record.regret_series.len())
                .copy_from_slice(&record.regret_series);
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::ptr;

    // The extern fns are exercised exactly as a C caller would use them:
    // raw pointers in, status codes out.

    unsafe fn ball_instance() -> *mut lb_instance {
        let theta = [1.6f64, 1.2];
        let mut inst: *mut lb_instance = ptr::null_mut();
        let st = lb_instance_new_ball(theta.as_ptr(), 2, 2.0, 64, &mut inst);
        assert_eq!(st, lb_status::LB_OK);
        assert!(!inst.is_null());
        inst
    }

    /// Pushes a deterministic alternating history on `+e1` / `+e2`.
    unsafe fn seeded_history(rounds: usize) -> *mut lb_history {
        let mut h: *mut lb_history = ptr::null_mut();
        assert_eq!(lb_history_new(2, &mut h), lb_status::LB_OK);
        let e1 = [1.0f64, 0.0];
        let e2 = [0.0f64, 1.0];
        for i in 0..rounds {
            let (arm, r) = if i % 2 == 0 { (&e1, (i % 4 == 0) as c_int) } else { (&e2, 1) };
            assert_eq!(lb_history_push(h, arm.as_ptr(), 2, r), lb_status::LB_OK);
        }
        h
    }

    #[test]
    fn version_and_link_function() {
        unsafe {
            let v = CStr::from_ptr(lb_version());
            assert!(!v.to_bytes().is_empty());
        }
        assert_relative_eq!(lb_logistic(0.0), 0.5);
        assert!(lb_logistic(30.0) > 0.999_999);
        assert!(lb_logistic(-30.0) < 1e-6);
    }

    #[test]
    fn instance_lifecycle_and_metadata() {
        unsafe {
            let inst = ball_instance();
            assert_eq!(lb_instance_dim(inst), 2);

            let (mut ks, mut kx, mut kg) = (0.0, 0.0, 0.0);
            assert_eq!(lb_instance_kappas(inst, &mut ks, &mut kx, &mut kg), lb_status::LB_OK);
            // The constants order by the sets they range over.
            assert!(ks >= 4.0, "kappa_star {ks} below the logistic floor");
            assert!(kx >= ks && kg >= kx, "ordering violated: {ks} {kx} {kg}");

            let mut coords = [0.0f64; 2];
            let mut value = 0.0f64;
            assert_eq!(lb_instance_best_arm(inst, coords.as_mut_ptr(), &mut value), lb_status::LB_OK);
            // Ball arm set: the best arm is theta / |theta| and the value its norm.
            assert_relative_eq!(coords[0], 0.8, epsilon = 1e-12);
            assert_relative_eq!(coords[1], 0.6, epsilon = 1e-12);
            assert_relative_eq!(value, 2.0, epsilon = 1e-12);

            lb_instance_free(inst);
            lb_instance_free(ptr::null_mut()); // free(NULL) is a no-op
        }
    }

    #[test]
    fn constructor_rejects_bad_input() {
        unsafe {
            let theta = [1.0f64, 0.0];
            let mut inst: *mut lb_instance = ptr::null_mut();

            assert_eq!(
                lb_instance_new_ball(ptr::null(), 2, 2.0, 0, &mut inst),
                lb_status::LB_NULL_POINTER
            );
            assert_eq!(
                lb_instance_new_ball(theta.as_ptr(), 2, -1.0, 0, &mut inst),
                lb_status::LB_INVALID_ARGUMENT
            );
            assert_eq!(
                lb_instance_new_ball(theta.as_ptr(), 2, 2.0, 0, ptr::null_mut()),
                lb_status::LB_NULL_POINTER
            );
            // Arm outside the unit ball in a finite dictionary.
            let arms = [2.0f64, 0.0];
            assert_eq!(
                lb_instance_new_finite(theta.as_ptr(), 2, 2.0, arms.as_ptr(), 1, &mut inst),
                lb_status::LB_INVALID_ARGUMENT
            );
            let msg = CStr::from_ptr(lb_last_error_message());
            assert!(!msg.to_bytes().is_empty(), "failed call left no error message");
        }
    }

    #[test]
    fn history_push_validates() {
        unsafe {
            let h = seeded_history(6);
            assert_eq!(lb_history_len(h), 6);

            let wrong_dim = [1.0f64, 0.0, 0.0];
            // Arm::new accepts a 3-vector; the push must reject the mismatch.
            assert_eq!(
                lb_history_push(h, wrong_dim.as_ptr(), 3, 1),
                lb_status::LB_DIMENSION_MISMATCH
            );
            let arm = [1.0f64, 0.0];
            assert_eq!(lb_history_push(h, arm.as_ptr(), 2, 2), lb_status::LB_INVALID_ARGUMENT);
            assert_eq!(lb_history_len(h), 6, "rejected pushes must not append");

            lb_history_free(h);
            lb_history_free(ptr::null_mut());
        }
    }

    #[test]
    fn mle_and_confidence_roundtrip() {
        unsafe {
            let h = seeded_history(40);

            let mut theta = [0.0f64; 2];
            let mut loss = 0.0f64;
            assert_eq!(lb_fit_mle(h, 1.0, theta.as_mut_ptr(), &mut loss), lb_status::LB_OK);
            assert!(theta.iter().all(|t| t.is_finite()));
            assert!(loss.is_finite() && loss > 0.0);

            let mut c: *mut lb_confidence = ptr::null_mut();
            assert_eq!(lb_confidence_build(h, 0.05, 2.0, &mut c), lb_status::LB_OK);
            // The snapshot steers the round after the 40 recorded ones.
            assert_eq!(lb_confidence_round(c), 41);
            assert_eq!(lb_confidence_dim(c), 2);

            let gamma = lb_confidence_gamma(c);
            let beta = lb_confidence_beta(c);
            let lambda = lb_confidence_lambda(c);
            assert!(gamma > 0.0 && lambda >= 1.0);
            // beta = gamma + gamma^2 / sqrt(lambda) always exceeds gamma.
            assert!(beta > gamma, "beta {beta} <= gamma {gamma}");

            let mut hat = [0.0f64; 2];
            assert_eq!(lb_confidence_theta_hat(c, hat.as_mut_ptr()), lb_status::LB_OK);

            // The center belongs to both sets; a remote parameter to neither.
            let mut inside: c_int = -1;
            assert_eq!(lb_confidence_contains(c, hat.as_ptr(), 2, &mut inside), lb_status::LB_OK);
            assert_eq!(inside, 1);
            assert_eq!(
                lb_confidence_contains_relaxed(c, hat.as_ptr(), 2, &mut inside),
                lb_status::LB_OK
            );
            assert_eq!(inside, 1);
            // Outside the parameter ball, hence outside both sets no matter
            // how generous the early-round radii are.
            let far = [5.0f64, 0.0];
            assert_eq!(lb_confidence_contains(c, far.as_ptr(), 2, &mut inside), lb_status::LB_OK);
            assert_eq!(inside, 0);
            assert_eq!(
                lb_confidence_contains_relaxed(c, far.as_ptr(), 2, &mut inside),
                lb_status::LB_OK
            );
            assert_eq!(inside, 0);

            // Wrong dimension is reported as such, not as "outside".
            let bad = [0.0f64; 3];
            assert_eq!(
                lb_confidence_contains(c, bad.as_ptr(), 3, &mut inside),
                lb_status::LB_DIMENSION_MISMATCH
            );

            lb_confidence_free(c);
            lb_history_free(h);
        }
    }

    #[test]
    fn exact_set_within_relaxed_set() {
        unsafe {
            let h = seeded_history(30);
            let mut c: *mut lb_confidence = ptr::null_mut();
            assert_eq!(lb_confidence_build(h, 0.1, 2.0, &mut c), lb_status::LB_OK);

            // Probe a grid around the center: exact membership must imply
            // relaxed membership pointwise.
            let mut hat = [0.0f64; 2];
            assert_eq!(lb_confidence_theta_hat(c, hat.as_mut_ptr()), lb_status::LB_OK);
            for i in -4i32..=4 {
                for j in -4i32..=4 {
                    let p = [hat[0] + 0.4 * f64::from(i), hat[1] + 0.4 * f64::from(j)];
                    let (mut exact, mut relaxed) = (0, 0);
                    assert_eq!(lb_confidence_contains(c, p.as_ptr(), 2, &mut exact), lb_status::LB_OK);
                    assert_eq!(
                        lb_confidence_contains_relaxed(c, p.as_ptr(), 2, &mut relaxed),
                        lb_status::LB_OK
                    );
                    assert!(exact <= relaxed, "exact member escaped the relaxed set at {p:?}");
                }
            }

            lb_confidence_free(c);
            lb_history_free(h);
        }
    }

    #[test]
    fn planning_is_optimistic_over_the_center() {
        unsafe {
            let h = seeded_history(30);
            let mut c: *mut lb_confidence = ptr::null_mut();
            assert_eq!(lb_confidence_build(h, 0.1, 2.0, &mut c), lb_status::LB_OK);

            let mut hat = [0.0f64; 2];
            assert_eq!(lb_confidence_theta_hat(c, hat.as_mut_ptr()), lb_status::LB_OK);
            let hat_norm = (hat[0] * hat[0] + hat[1] * hat[1]).sqrt();

            let mut arm = [0.0f64; 2];
            let mut value = 0.0f64;
            let mut opt_theta = [0.0f64; 2];
            assert_eq!(
                lb_plan_ball(c, arm.as_mut_ptr(), &mut value, opt_theta.as_mut_ptr()),
                lb_status::LB_OK
            );
            let arm_norm = (arm[0] * arm[0] + arm[1] * arm[1]).sqrt();
            assert!(arm_norm <= 1.0 + 1e-9, "planned arm left the unit ball");
            // The set contains the center, so the optimistic value cannot be
            // beaten by playing the center's own best response.
            assert!(value >= hat_norm - 1e-8, "value {value} below center support {hat_norm}");
            assert_relative_eq!(arm[0] * opt_theta[0] + arm[1] * opt_theta[1], value, epsilon = 1e-6);

            // Finite dictionary: the winner maximizes over rows.
            let dict = [1.0f64, 0.0, 0.0, 1.0, -1.0, 0.0];
            let mut index = usize::MAX;
            assert_eq!(
                lb_plan_finite(c, dict.as_ptr(), 3, &mut index, &mut value),
                lb_status::LB_OK
            );
            assert!(index < 3);
            let center_best = hat[0].max(hat[1]).max(-hat[0]);
            assert!(value >= center_best - 1e-8);

            lb_confidence_free(c);
            lb_history_free(h);
        }
    }

    #[test]
    fn episode_runs_deterministically() {
        unsafe {
            let inst = ball_instance();
            let mut series = vec![0.0f64; 50];
            let mut final_a = 0.0f64;
            assert_eq!(
                lb_episode_run(
                    inst,
                    c"ofulog-r".as_ptr(),
                    50,
                    7,
                    0.1,
                    &mut final_a,
                    series.as_mut_ptr(),
                ),
                lb_status::LB_OK
            );
            assert!(final_a.is_finite() && final_a >= 0.0);
            assert_relative_eq!(series[49], final_a);
            assert!(series.windows(2).all(|w| w[1] >= w[0] - 1e-12), "regret decreased");

            // Bitwise reproducibility under the same seed.
            let mut final_b = 0.0f64;
            assert_eq!(
                lb_episode_run(inst, c"ofulog-r".as_ptr(), 50, 7, 0.1, &mut final_b, ptr::null_mut()),
                lb_status::LB_OK
            );
            assert_eq!(final_a.to_bits(), final_b.to_bits());

            // The other registered policies run through the same entry.
            for name in [c"glm-ucb", c"eps-greedy", c"best-fixed"] {
                let mut r = 0.0f64;
                assert_eq!(
                    lb_episode_run(inst, name.as_ptr(), 30, 3, 0.1, &mut r, ptr::null_mut()),
                    lb_status::LB_OK,
                    "policy {name:?} failed"
                );
                assert!(r.is_finite() && r >= 0.0);
            }
            let st = lb_episode_run(inst, c"thompson".as_ptr(), 10, 0, 0.1, ptr::null_mut(), ptr::null_mut());
            assert_eq!(st, lb_status::LB_INVALID_ARGUMENT);

            lb_instance_free(inst);
        }
    }

    #[test]
    fn generated_header_covers_the_surface() {
        let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/logbandit.h"))
            .expect("build script should have generated include/logbandit.h");
        for symbol in [
            "lb_status",
            "lb_instance_new_ball",
            "lb_history_push",
            "lb_confidence_build",
            "lb_confidence_contains_relaxed",
            "lb_plan_ball",
            "lb_episode_run",
            "lb_last_error_message",
        ] {
            assert!(header.contains(symbol), "header is missing {symbol}");
        }
    }
}
