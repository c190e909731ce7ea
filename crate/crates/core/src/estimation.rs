//! Regularized logistic regression on bandit histories.
//!
//! The loss is the Bernoulli negative log-likelihood plus a ridge term
//! `(lambda/2) |theta|^2`; with `z_s = x_s . theta` it reads
//!
//! ```text
//! L(theta) = sum_s [ softplus(z_s) - r_s z_s ] + (lambda/2) |theta|^2
//! ```
//!
//! which is strictly convex and smooth, so a damped Newton iteration with a
//! backtracking line search converges globally and, warm-started round to
//! round, typically needs one or two steps.
//!
//! Histories are stored packed (row-major features + rewards) because every
//! hot path in the crate is a linear scan over rounds; at `10^4` rounds the
//! per-candidate evaluations inside the planner dominate total runtime.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::PdFactor;
use crate::logistic::{log1p_exp, logistic, logistic_deriv};
use crate::problem::Arm;

/// An ordered record of played arms and binary rewards.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct History {
    dim: usize,
    feats: Vec<f64>,
    rewards: Vec<u8>,
}

impl History {
    pub fn new(dim: usize) -> Self {
        History { dim, feats: Vec::new(), rewards: Vec::new() }
    }

    pub fn with_capacity(dim: usize, rounds: usize) -> Self {
        History {
            dim,
            feats: Vec::with_capacity(dim * rounds),
            rewards: Vec::with_capacity(rounds),
        }
    }

    /// Appends a round. The arm must match the history dimension.
    pub fn push(&mut self, arm: &Arm, reward: bool) -> Result<()> {
        if arm.dim() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: arm.dim() });
        }
        self.feats.extend_from_slice(arm.as_slice());
        self.rewards.push(u8::from(reward));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Feature row of round `i` (0-based).
    pub fn arm_features(&self, i: usize) -> &[f64] {
        &self.feats[i * self.dim..(i + 1) * self.dim]
    }

    pub fn reward(&self, i: usize) -> bool {
        self.rewards[i] == 1
    }

    /// Iterates `(features, reward)` in play order.
    pub fn rounds(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.feats
            .chunks_exact(self.dim.max(1))
            .zip(self.rewards.iter().map(|&r| f64::from(r)))
    }

    /// Sum of `r_s x_s`, the data side of the MLE stationarity identity.
    pub fn reward_feature_sum(&self) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim);
        for (x, r) in self.rounds() {
            if r == 1.0 {
                for (o, xi) in out.iter_mut().zip(x) {
                    *o += xi;
                }
            }
        }
        out
    }
}

#[inline]
fn dot(x: &[f64], theta: &[f64]) -> f64 {
    x.iter().zip(theta).map(|(a, b)| a * b).sum()
}

fn check_theta(h: &History, theta: &DVector<f64>) -> Result<()> {
    if theta.len() != h.dim() {
        return Err(Error::Dimension { expected: h.dim(), got: theta.len() });
    }
    if theta.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite { what: "theta coordinate" });
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::Domain { what: format!("lambda must be >= 0, got {lambda}") });
    }
    Ok(())
}

/// The ridge-regularized log loss `L(theta)`.
pub fn log_loss(h: &History, theta: &DVector<f64>, lambda: f64) -> Result<f64> {
    check_theta(h, theta)?;
    check_lambda(lambda)?;
    let th = theta.as_slice();
    let mut acc = 0.0;
    for (x, r) in h.rounds() {
        let z = dot(x, th);
        acc += log1p_exp(z) - r * z;
    }
    Ok(acc + 0.5 * lambda * theta.norm_squared())
}

/// Gradient of the log loss: `sum_s (mu(z_s) - r_s) x_s + lambda theta`.
pub fn loss_grad(h: &History, theta: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    check_theta(h, theta)?;
    check_lambda(lambda)?;
    let th = theta.as_slice();
    let mut grad = DVector::zeros(h.dim());
    for (x, r) in h.rounds() {
        let w = logistic(dot(x, th)) - r;
        for (g, xi) in grad.iter_mut().zip(x) {
            *g += w * xi;
        }
    }
    grad += theta * lambda;
    Ok(grad)
}

/// Prediction-side feature sum `sum_s mu(z_s) x_s + lambda theta`.
///
/// Differences of this map equal differences of the loss gradient (the reward
/// terms cancel), which is what the exact confidence set measures; at the
/// exact MLE it equals [`History::reward_feature_sum`].
pub fn link_sum(h: &History, theta: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    check_theta(h, theta)?;
    check_lambda(lambda)?;
    let th = theta.as_slice();
    let mut out = DVector::zeros(h.dim());
    for (x, _) in h.rounds() {
        let m = logistic(dot(x, th));
        for (o, xi) in out.iter_mut().zip(x) {
            *o += m * xi;
        }
    }
    out += theta * lambda;
    Ok(out)
}

/// Loss Hessian `sum_s mu'(z_s) x_s x_s' + lambda I`.
pub fn hessian(h: &History, theta: &DVector<f64>, lambda: f64) -> Result<DMatrix<f64>> {
    check_theta(h, theta)?;
    check_lambda(lambda)?;
    let d = h.dim();
    let th = theta.as_slice();
    let mut hess = DMatrix::zeros(d, d);
    for (x, _) in h.rounds() {
        let w = logistic_deriv(dot(x, th));
        for i in 0..d {
            let wx = w * x[i];
            for j in i..d {
                hess[(i, j)] += wx * x[j];
            }
        }
    }
    for i in 0..d {
        hess[(i, i)] += lambda;
        for j in (i + 1)..d {
            hess[(j, i)] = hess[(i, j)];
        }
    }
    Ok(hess)
}

/// Single fused pass computing loss, gradient and Hessian together; the
/// Newton iteration calls this once per step.
pub(crate) fn loss_grad_hess(
    h: &History,
    theta: &DVector<f64>,
    lambda: f64,
) -> Result<(f64, DVector<f64>, DMatrix<f64>)> {
    check_theta(h, theta)?;
    check_lambda(lambda)?;
    let d = h.dim();
    let th = theta.as_slice();
    let mut loss = 0.0;
    let mut grad = DVector::zeros(d);
    let mut hess = DMatrix::zeros(d, d);
    for (x, r) in h.rounds() {
        let z = dot(x, th);
        // One exp(-|z|) yields the mean, the variance weight and the
        // softplus term; this pass dominates Newton's per-iteration cost.
        let e = (-z.abs()).exp();
        let b = 1.0 + e;
        let m = if z >= 0.0 { 1.0 / b } else { e / b };
        let w = e / (b * b);
        loss += z.max(0.0) + e.ln_1p() - r * z;
        let gm = m - r;
        for i in 0..d {
            grad[i] += gm * x[i];
            let wx = w * x[i];
            for j in i..d {
                hess[(i, j)] += wx * x[j];
            }
        }
    }
    loss += 0.5 * lambda * theta.norm_squared();
    grad += theta * lambda;
    for i in 0..d {
        hess[(i, i)] += lambda;
        for j in (i + 1)..d {
            hess[(j, i)] = hess[(i, j)];
        }
    }
    Ok((loss, grad, hess))
}

/// Stopping and effort controls for [`fit_mle`].
#[derive(Debug, Clone, Copy)]
pub struct MleOptions {
    /// Euclidean gradient-norm tolerance.
    pub tol: f64,
    pub max_iter: u32,
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions { tol: 1e-9, max_iter: 100 }
    }
}

/// A converged fit, with the pieces downstream consumers reuse.
#[derive(Debug, Clone)]
pub struct MleFit {
    pub theta: DVector<f64>,
    /// Loss value at `theta`.
    pub loss: f64,
    pub grad_norm: f64,
    pub iterations: u32,
    /// Hessian at `theta` (with the ridge term), saved so confidence-state
    /// construction does not redo the pass.
    pub hessian: DMatrix<f64>,
}

/// Minimizes the regularized log loss by damped Newton with an Armijo
/// backtracking (halving) line search.
///
/// `warm` seeds the iteration; across bandit rounds the previous optimum is
/// an excellent start and one step usually suffices. Returns
/// [`Error::NoConvergence`] carrying the best iterate if `max_iter` is
/// exhausted.
pub fn fit_mle(
    h: &History,
    lambda: f64,
    opts: &MleOptions,
    warm: Option<&DVector<f64>>,
) -> Result<MleFit> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain { what: format!("fit_mle needs lambda > 0, got {lambda}") });
    }
    let d = h.dim();
    let mut theta = match warm {
        Some(w) => {
            check_theta(h, w)?;
            w.clone()
        }
        None => DVector::zeros(d),
    };

    const ARMIJO_C1: f64 = 1e-4;
    let (mut loss, mut grad, mut hess) = loss_grad_hess(h, &theta, lambda)?;
    for iter in 0..=opts.max_iter {
        let grad_norm = grad.norm();
        if grad_norm <= opts.tol {
            return Ok(MleFit { theta, loss, grad_norm, iterations: iter, hessian: hess });
        }
        if iter == opts.max_iter {
            break;
        }
        let factor = PdFactor::new(hess.clone())?;
        let dir = -factor.solve(&grad)?;
        let slope = grad.dot(&dir); // negative for a descent direction
        // Summing n loss terms accumulates rounding of order n * eps * |loss|,
        // so decreases below that scale cannot be confirmed by comparing two
        // evaluations.
        let noise = 4.0 * (h.len().max(1) as f64) * f64::EPSILON * (1.0 + loss.abs());
        if -slope <= noise / ARMIJO_C1 {
            // Even the full step's sufficient-decrease margin would drown in
            // evaluation noise, so backtracking could only reject real
            // progress and stall. The Newton decrement here is at most
            // sqrt(noise / c1), deep inside the quadratic basin where the
            // undamped step is safe. Take it as is.
            theta += &dir;
        } else {
            let mut step = 1.0;
            let mut candidate;
            loop {
                candidate = &theta + &dir * step;
                let cand_loss = log_loss(h, &candidate, lambda)?;
                // The noise allowance keeps the test honest once halving has
                // shrunk the predicted decrease below evaluation noise.
                if cand_loss <= loss + ARMIJO_C1 * step * slope + noise || step < 1e-12 {
                    break;
                }
                step *= 0.5;
            }
            theta = candidate;
        }
        let refreshed = loss_grad_hess(h, &theta, lambda)?;
        loss = refreshed.0;
        grad = refreshed.1;
        hess = refreshed.2;
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        grad_norm: grad.norm(),
        best: theta.iter().copied().collect(),
    })
}

/// The regularization schedule `lambda_t = max(floor, d ln t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegSchedule {
    pub dim: usize,
    /// Lower clamp; defaults to 1 so early-round matrices stay well
    /// conditioned and the radius formula stays meaningful.
    pub floor: f64,
}

impl RegSchedule {
    pub fn new(dim: usize) -> Self {
        RegSchedule { dim, floor: 1.0 }
    }

    /// `lambda_t` at round `t >= 1`.
    pub fn lambda_at(&self, t: u64) -> Result<f64> {
        if t == 0 {
            return Err(Error::Domain { what: "round index starts at 1".into() });
        }
        Ok(self.floor.max(self.dim as f64 * (t as f64).ln()))
    }
}

/// Radius of the exact (gradient-metric) confidence set:
///
/// ```text
/// gamma_t = sqrt(lambda) (S + 1/2) + (d / sqrt(lambda)) ln( (4/delta) (1 + t / (16 d lambda)) )
/// ```
pub fn gamma_radius(t: u64, dim: usize, lambda: f64, delta: f64, s_bound: f64) -> Result<f64> {
    if t == 0 {
        return Err(Error::Domain { what: "round index starts at 1".into() });
    }
    if dim == 0 {
        return Err(Error::Domain { what: "dimension must be positive".into() });
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain { what: format!("lambda must be positive, got {lambda}") });
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain { what: format!("delta must lie in (0, 1], got {delta}") });
    }
    if !(s_bound > 0.0) || !s_bound.is_finite() {
        return Err(Error::Domain { what: format!("s_bound must be positive, got {s_bound}") });
    }
    let d = dim as f64;
    let root = lambda.sqrt();
    let occupancy = 1.0 + t as f64 / (16.0 * d * lambda);
    Ok(root * (s_bound + 0.5) + d / root * ((4.0 / delta) * occupancy).ln())
}

/// Radius of the convex-relaxed (loss-gap) set: `beta = gamma + gamma^2 / sqrt(lambda)`.
pub fn beta_radius(gamma: f64, lambda: f64) -> Result<f64> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::Domain { what: format!("gamma must be >= 0, got {gamma}") });
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain { what: format!("lambda must be positive, got {lambda}") });
    }
    Ok(gamma + gamma * gamma / lambda.sqrt())
}
