//! Optimistic planning over the relaxed confidence set.
//!
//! Every planning query reduces to support-function evaluations
//! `h(x) = max { x . theta : |theta| <= S, loss gap <= beta^2 }`. The
//! maximizer is found by a dual scan: for a tilt strength `s >= 0`, the
//! strongly convex subproblem `min L(theta) - s x . theta` over the ball is
//! solved by projected Newton, and `s` is driven by a bracketing
//! false-position iteration until the loss gap of the tilted minimizer meets
//! the budget. Both the loss gap and the attained value are monotone in `s`,
//! so the bracket certifies a two-sided value estimate and the returned
//! parameter is feasible by construction (it comes from the low side of the
//! bracket).
//!
//! Warm starts carry the tilt strength and the primal iterate across rounds;
//! a warm re-solve typically needs only a handful of likelihood passes.

use nalgebra::DVector;

use crate::confidence::ConfidenceState;
use crate::error::{Error, Result};
use crate::estimation::{log_loss, loss_grad_hess, History};
use crate::linalg::PdFactor;
use crate::problem::Arm;

/// Tuning knobs for the direction solver.
#[derive(Debug, Clone)]
pub struct SolverOpts {
    /// Absolute accuracy demanded of the support value.
    pub value_tol: f64,
    /// Cap on projected-Newton iterations per tilted subproblem.
    pub max_newton: u32,
    /// Extra start directions (beyond the MLE direction) for set-diameter
    /// searches, consumed as `+e1, +e2, ..., -e1, -e2, ...`.
    pub restarts: usize,
}

impl Default for SolverOpts {
    fn default() -> Self {
        SolverOpts { value_tol: 1e-8, max_newton: 60, restarts: 4 }
    }
}

/// Work counters and certificates from one direction solve.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolverReport {
    /// Total projected-Newton iterations across all tilted subproblems.
    pub newton_iterations: u32,
    /// Tilt-bracketing iterations (zero when a shortcut exit fired).
    pub outer_iterations: u32,
    /// Width of the final two-sided value bracket.
    pub value_bracket: f64,
    /// Unused loss budget at the returned parameter (non-negative up to the
    /// membership slack).
    pub budget_slack: f64,
}

/// Warm-start state for one direction: last tilt strength and primal point.
#[derive(Debug, Clone)]
pub struct PlannerWarm {
    tilt: f64,
    theta: DVector<f64>,
}

/// Outcome of a support-function evaluation along one direction.
#[derive(Debug, Clone)]
pub struct DirectionPlan {
    /// The support value `x . theta` at the returned parameter.
    pub value: f64,
    /// A feasible parameter attaining `value`.
    pub theta: DVector<f64>,
    pub report: SolverReport,
    /// State to seed the next solve along a nearby direction.
    pub warm: PlannerWarm,
}

/// A full planning decision: the chosen arm, the optimistic parameter, and
/// the optimistic values in logit and reward space.
#[derive(Debug, Clone)]
pub struct PlanResult {
    pub arm: Arm,
    /// Index into the finite arm list; `None` for continuous sets.
    pub arm_index: Option<usize>,
    pub theta: DVector<f64>,
    /// Maximal inner product `arm . theta` over the set.
    pub value: f64,
    /// `logistic(value)`: the optimistic expected reward.
    pub optimistic_reward: f64,
    pub report: SolverReport,
}

fn clamp_ball(theta: &mut DVector<f64>, s_bound: f64) {
    let n = theta.norm();
    if n > s_bound {
        *theta *= s_bound / n;
    }
}

/// Minimizes `L(theta) - tilt * x . theta` over the `S`-ball by projected
/// Newton with backtracking. Returns the minimizer, its plain loss value,
/// and the iteration count.
fn tilted_min(
    h: &History,
    lambda: f64,
    s_bound: f64,
    tilt: f64,
    x: &DVector<f64>,
    start: &DVector<f64>,
    max_iter: u32,
) -> Result<(DVector<f64>, f64, u32)> {
    let mut theta = start.clone();
    clamp_ball(&mut theta, s_bound);
    let mut iterations = 0u32;
    let mut loss;
    loop {
        let (l, mut grad, hess) = loss_grad_hess(h, &theta, lambda)?;
        loss = l;
        grad.axpy(-tilt, x, 1.0);
        let phi = loss - tilt * x.dot(&theta);

        // Projected-gradient residual: zero exactly at a constrained
        // stationary point, cheap to evaluate for a radial constraint.
        let mut probe = &theta - &grad;
        clamp_ball(&mut probe, s_bound);
        let residual = (&probe - &theta).norm();
        if residual <= 1e-10 * (1.0 + grad.norm()) || iterations >= max_iter {
            break;
        }

        let factor = PdFactor::new(hess)?;
        let dir = -factor.solve(&grad)?;
        let slope = grad.dot(&dir);
        iterations += 1;

        if -slope <= 1e3 * f64::EPSILON * (1.0 + phi.abs()) {
            // Predicted decrease is below the floating-point resolution of
            // the objective; the full step lands inside the quadratic basin.
            theta += &dir;
            clamp_ball(&mut theta, s_bound);
            loss = log_loss(h, &theta, lambda)?;
            break;
        }

        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..50 {
            let mut cand = &theta + &dir * alpha;
            clamp_ball(&mut cand, s_bound);
            let step = &cand - &theta;
            let cand_loss = log_loss(h, &cand, lambda)?;
            let cand_phi = cand_loss - tilt * x.dot(&cand);
            if cand_phi <= phi + 1e-4 * grad.dot(&step) {
                theta = cand;
                loss = cand_loss;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // The projected direction no longer improves at floating-point
            // resolution; the iterate is as converged as it will get.
            break;
        }
    }
    Ok((theta, loss, iterations))
}

/// Evaluates the support function of the relaxed set along `x`, returning a
/// feasible maximizer with a certified two-sided value bracket.
pub fn maximize_direction(
    h: &History,
    state: &ConfidenceState,
    x: &DVector<f64>,
    warm: Option<&PlannerWarm>,
    opts: &SolverOpts,
) -> Result<DirectionPlan> {
    let d = state.dim();
    if x.len() != d {
        return Err(Error::Dimension { expected: d, got: x.len() });
    }
    if x.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite { what: "direction coordinate" });
    }
    let s_bound = state.s_bound();
    let lambda = state.lambda();
    let budget = state.loss_budget();
    let base_loss = state.loss_at_hat();
    let x_norm = x.norm();

    let mut report = SolverReport::default();

    // Degenerate direction: any feasible point attains the value 0; use the
    // in-ball loss minimizer so the returned parameter is always feasible.
    if x_norm < 1e-12 {
        let (theta, loss, iters) = tilted_min(
            h,
            lambda,
            s_bound,
            0.0,
            x,
            state.theta_hat(),
            opts.max_newton,
        )?;
        let gap = loss - base_loss;
        if gap > budget * (1.0 + 1e-9) {
            return Err(Error::Planner {
                what: "relaxed confidence set is empty over the parameter ball".into(),
            });
        }
        report.newton_iterations = iters;
        report.budget_slack = budget - gap;
        return Ok(DirectionPlan {
            value: 0.0,
            warm: PlannerWarm { tilt: 0.0, theta: theta.clone() },
            theta,
            report,
        });
    }

    // Shortcut: if the ball corner along `x` already satisfies the loss
    // budget, the loss constraint is inactive and the answer is closed-form.
    let corner = x * (s_bound / x_norm);
    let corner_gap = log_loss(h, &corner, lambda)? - base_loss;
    if corner_gap <= budget * (1.0 + 1e-12) {
        report.budget_slack = budget - corner_gap;
        let tilt = warm.map_or(1.0, |w| w.tilt);
        return Ok(DirectionPlan {
            value: s_bound * x_norm,
            warm: PlannerWarm { tilt, theta: corner.clone() },
            theta: corner,
            report,
        });
    }

    // Bracket the tilt strength: gap(s) is nondecreasing, gap(0) < budget
    // (else the set is empty) and some finite s overshoots because the
    // corner does.
    let start = warm.map_or_else(|| state.theta_hat().clone(), |w| w.theta.clone());
    let mut probe_start = start;

    let eval = |tilt: f64,
                    seed: &DVector<f64>,
                    report: &mut SolverReport|
     -> Result<(DVector<f64>, f64, f64)> {
        let (theta, loss, iters) = tilted_min(h, lambda, s_bound, tilt, x, seed, opts.max_newton)?;
        report.newton_iterations += iters;
        let value = x.dot(&theta);
        Ok((theta, loss - base_loss, value))
    };

    let warm_tilt = warm.map_or(1.0, |w| w.tilt).max(1e-6);
    let (theta0, gap0, value0) = eval(warm_tilt, &probe_start, &mut report)?;
    probe_start = theta0.clone();

    // Grow or shrink the initial tilt geometrically until the budget is
    // bracketed between `lo` (feasible side) and `hi` (overshoot side).
    let mut lo;
    let mut hi;
    if gap0 <= budget {
        lo = (warm_tilt, theta0, gap0, value0);
        let mut t = warm_tilt;
        loop {
            t *= 4.0;
            let (th, g, v) = eval(t, &probe_start, &mut report)?;
            probe_start = th.clone();
            if g > budget {
                hi = (t, th, g, v);
                break;
            }
            lo = (t, th, g, v);
            if t > 1e18 {
                return Err(Error::Planner {
                    what: "tilt bracketing failed to overshoot the loss budget".into(),
                });
            }
        }
    } else {
        hi = (warm_tilt, theta0, gap0, value0);
        let mut t = warm_tilt;
        loop {
            t *= 0.25;
            if t < 1e-14 {
                let (th, g, v) = eval(0.0, &probe_start, &mut report)?;
                if g > budget * (1.0 + 1e-9) {
                    return Err(Error::Planner {
                        what: "relaxed confidence set is empty over the parameter ball".into(),
                    });
                }
                lo = (0.0, th, g, v);
                break;
            }
            let (th, g, v) = eval(t, &probe_start, &mut report)?;
            probe_start = th.clone();
            if g <= budget {
                lo = (t, th, g, v);
                break;
            }
            hi = (t, th, g, v);
        }
    }

    // Illinois false position on gap(s) - budget over [lo, hi]; the value
    // gap between the bracket ends bounds the optimality error.
    let mut f_lo = lo.3;
    let mut f_hi = hi.3;
    let mut g_lo = lo.2 - budget;
    let mut g_hi = hi.2 - budget;
    let mut side = 0i8;
    for _ in 0..60 {
        report.outer_iterations += 1;
        if (f_hi - f_lo).abs() <= opts.value_tol {
            break;
        }
        let denom = g_hi - g_lo;
        let mut mid = if denom.abs() > 1e-300 {
            hi.0 - g_hi * (hi.0 - lo.0) / denom
        } else {
            0.5 * (lo.0 + hi.0)
        };
        // Keep strictly inside the bracket to guarantee progress.
        let span = hi.0 - lo.0;
        if !(mid > lo.0 + 1e-3 * span && mid < hi.0 - 1e-3 * span) {
            mid = 0.5 * (lo.0 + hi.0);
        }
        let (th, g, v) = eval(mid, &probe_start, &mut report)?;
        probe_start = th.clone();
        if g <= budget {
            lo = (mid, th, g, v);
            f_lo = v;
            if side == -1 {
                g_hi *= 0.5;
            }
            g_lo = g - budget;
            side = -1;
        } else {
            hi = (mid, th, g, v);
            f_hi = v;
            if side == 1 {
                g_lo *= 0.5;
            }
            g_hi = g - budget;
            side = 1;
        }
    }

    report.value_bracket = (f_hi - f_lo).abs();
    report.budget_slack = budget - lo.2;
    Ok(DirectionPlan {
        value: lo.3,
        theta: lo.1.clone(),
        warm: PlannerWarm { tilt: lo.0.max(1e-6), theta: lo.1 },
        report,
    })
}

/// Optimistic choice over a finite arm list: maximizes the support value per
/// arm and keeps the first arm attaining the maximum.
pub fn plan_finite(
    h: &History,
    state: &ConfidenceState,
    arms: &[Arm],
    warm: Option<&mut FiniteWarm>,
    opts: &SolverOpts,
) -> Result<PlanResult> {
    if arms.is_empty() {
        return Err(Error::EmptyArmSet);
    }
    let mut cache = warm;
    if let Some(c) = cache.as_deref_mut() {
        if c.per_arm.len() != arms.len() {
            c.per_arm = vec![None; arms.len()];
        }
    }
    let mut best: Option<(usize, DirectionPlan)> = None;
    for (i, arm) in arms.iter().enumerate() {
        let x = DVector::from_column_slice(arm.as_slice());
        let seed = cache.as_deref().and_then(|c| c.per_arm[i].as_ref());
        let plan = maximize_direction(h, state, &x, seed, opts)?;
        if let Some(c) = cache.as_deref_mut() {
            c.per_arm[i] = Some(plan.warm.clone());
        }
        let better = match &best {
            None => true,
            Some((_, b)) => plan.value > b.value,
        };
        if better {
            best = Some((i, plan));
        }
    }
    let (index, plan) = best.expect("non-empty arm list always yields a plan");
    Ok(PlanResult {
        arm: arms[index].clone(),
        arm_index: Some(index),
        optimistic_reward: crate::logistic::logistic(plan.value),
        value: plan.value,
        theta: plan.theta,
        report: plan.report,
    })
}

/// Per-arm warm cache for [`plan_finite`].
#[derive(Debug, Clone, Default)]
pub struct FiniteWarm {
    per_arm: Vec<Option<PlannerWarm>>,
}

/// Warm cache for [`plan_ball`]: the last chosen direction and its solver
/// state.
#[derive(Debug, Clone)]
pub struct BallWarm {
    x: DVector<f64>,
    dir: PlannerWarm,
}

/// Optimistic choice over the unit ball (or sphere): the joint maximization
/// of `x . theta` over directions and set members, i.e. the largest-norm
/// member of the set. Solved by alternating the closed-form direction update
/// `x <- theta / |theta|` with support solves, from several start directions
/// when cold.
pub fn plan_ball(
    h: &History,
    state: &ConfidenceState,
    warm: Option<&BallWarm>,
    opts: &SolverOpts,
) -> Result<PlanResult> {
    let d = state.dim();
    let mut starts: Vec<DVector<f64>> = Vec::new();
    if let Some(w) = warm {
        starts.push(w.x.clone());
    } else {
        let hat = state.theta_hat();
        if hat.norm() > 1e-9 {
            starts.push(hat.normalize());
        } else {
            starts.push(DVector::from_fn(d, |i, _| if i == 0 { 1.0 } else { 0.0 }));
        }
        for k in 0..opts.restarts {
            let axis = k % d;
            let sign = if k < d { 1.0 } else { -1.0 };
            let mut e = DVector::zeros(d);
            e[axis] = sign;
            if starts.iter().all(|s| (s - &e).norm() > 1e-9) {
                starts.push(e);
            }
        }
    }

    let mut best: Option<(DVector<f64>, DirectionPlan)> = None;
    let mut report = SolverReport::default();
    for start in starts {
        let mut x = start;
        let mut dir_warm = warm.map(|w| w.dir.clone());
        let mut last_value = f64::NEG_INFINITY;
        for _ in 0..40 {
            let plan = maximize_direction(h, state, &x, dir_warm.as_ref(), opts)?;
            report.newton_iterations += plan.report.newton_iterations;
            report.outer_iterations += plan.report.outer_iterations;
            report.value_bracket = plan.report.value_bracket;
            report.budget_slack = plan.report.budget_slack;
            let norm = plan.theta.norm();
            let improved = plan.value > last_value + opts.value_tol;
            last_value = plan.value;
            let next_x = if norm > 1e-12 { plan.theta.normalize() } else { x.clone() };
            let moved = (&next_x - &x).norm() > 1e-10;
            dir_warm = Some(plan.warm.clone());
            let better = match &best {
                None => true,
                Some((_, b)) => plan.value > b.value,
            };
            if better {
                best = Some((x.clone(), plan));
            }
            if !moved || !improved {
                break;
            }
            x = next_x;
        }
    }
    let (x, plan) = best.expect("at least one start direction is always tried");
    let arm = Arm::new(x.iter().cloned().collect::<Vec<_>>())?;
    Ok(PlanResult {
        arm,
        arm_index: None,
        optimistic_reward: crate::logistic::logistic(plan.value),
        value: plan.value,
        theta: plan.theta,
        report,
    })
}

impl BallWarm {
    /// Builds warm state from a previous decision.
    pub fn from_plan(plan: &PlanResult) -> Option<BallWarm> {
        let x = DVector::from_column_slice(plan.arm.as_slice());
        let norm = plan.theta.norm();
        if norm < 1e-12 {
            return None;
        }
        Some(BallWarm {
            x,
            dir: PlannerWarm { tilt: 1.0, theta: plan.theta.clone() },
        })
    }
}

/// Which confidence set a brute-force scan should test against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetChoice {
    /// The exact (gradient-metric) set.
    Exact,
    /// The relaxed (loss-gap) set.
    Relaxed,
}

pub(crate) fn grid_members(
    h: &History,
    state: &ConfidenceState,
    resolution: usize,
    choice: SetChoice,
) -> Result<Vec<DVector<f64>>> {
    let d = state.dim();
    if d > 2 {
        return Err(Error::Unsupported {
            what: "grid scans are limited to one or two dimensions".into(),
        });
    }
    if resolution < 2 {
        return Err(Error::Domain { what: format!("grid resolution must be >= 2, got {resolution}") });
    }
    let s = state.s_bound();
    let coord = |k: usize| -s + 2.0 * s * k as f64 / (resolution - 1) as f64;
    let mut members = Vec::new();
    let mut test = |theta: DVector<f64>| -> Result<()> {
        let inside = match choice {
            SetChoice::Exact => state.contains(h, &theta)?,
            SetChoice::Relaxed => state.contains_relaxed(h, &theta)?,
        };
        if inside {
            members.push(theta);
        }
        Ok(())
    };
    if d == 1 {
        for i in 0..resolution {
            test(DVector::from_vec(vec![coord(i)]))?;
        }
    } else {
        for i in 0..resolution {
            for j in 0..resolution {
                test(DVector::from_vec(vec![coord(i), coord(j)]))?;
            }
        }
    }
    Ok(members)
}

/// Brute-force support value over a membership-filtered grid (plus the MLE
/// itself, so the scan is never empty). A lower bound on the true support
/// value; oracle and low-dimension fallback use only.
pub fn grid_support(
    h: &History,
    state: &ConfidenceState,
    x: &DVector<f64>,
    resolution: usize,
    choice: SetChoice,
) -> Result<(f64, DVector<f64>)> {
    let mut members = grid_members(h, state, resolution, choice)?;
    let hat = state.theta_hat().clone();
    if state.in_param_ball(&hat) {
        members.push(hat);
    }
    members
        .into_iter()
        .map(|m| (x.dot(&m), m))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or_else(|| Error::Planner {
            what: "no grid point satisfied the membership test".into(),
        })
}

/// Brute-force largest-norm member over a membership-filtered grid.
pub fn grid_max_norm(
    h: &History,
    state: &ConfidenceState,
    resolution: usize,
    choice: SetChoice,
) -> Result<(f64, DVector<f64>)> {
    let mut members = grid_members(h, state, resolution, choice)?;
    let hat = state.theta_hat().clone();
    if state.in_param_ball(&hat) {
        members.push(hat);
    }
    members
        .into_iter()
        .map(|m| (m.norm(), m))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or_else(|| Error::Planner {
            what: "no grid point satisfied the membership test".into(),
        })
}
