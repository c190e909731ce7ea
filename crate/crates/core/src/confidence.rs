//! Confidence sets for the logistic MLE.
//!
//! Two nested sets around the regularized MLE `theta_hat` are maintained, both
//! intersected with the parameter ball `|theta| <= S`:
//!
//! * the **exact set**: parameters whose prediction-sum shift from
//!   `theta_hat`, measured in the inverse Hessian metric *at the candidate*,
//!   is at most `gamma`;
//! * the **relaxed set**: parameters whose loss exceeds the optimum by at
//!   most `beta^2` — a convex superset (every exact member's loss gap is
//!   bounded by `beta^2` via a mean-value argument), which is what makes
//!   planning over it a convex subproblem per arm.
//!
//! Membership comparisons carry a relative slack of `1e-9` so boundary points
//! produced by other numeric routines do not flap.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::estimation::{
    beta_radius, fit_mle, gamma_radius, hessian, link_sum, log_loss, History, MleOptions,
    RegSchedule,
};
use crate::linalg::PdFactor;
use crate::logistic::chord_slope;

/// Relative slack applied to every membership inequality.
const MEMBERSHIP_SLACK: f64 = 1e-9;

#[inline]
fn leq_with_slack(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + MEMBERSHIP_SLACK * (1.0 + rhs.abs())
}

/// A fitted snapshot at the start of a round: the MLE, the radii, and the
/// cached pieces both membership tests share.
#[derive(Debug, Clone)]
pub struct ConfidenceState {
    round: u64,
    lambda: f64,
    delta: f64,
    s_bound: f64,
    gamma: f64,
    beta: f64,
    theta_hat: DVector<f64>,
    /// Loss value at `theta_hat`.
    loss_at_hat: f64,
    /// Prediction-side feature sum at `theta_hat`.
    link_at_hat: DVector<f64>,
    /// Hessian factor at `theta_hat` (candidate tests refactor at the
    /// candidate; this one serves planners and diagnostics).
    hess_at_hat: PdFactor,
    mle_iterations: u32,
}

impl ConfidenceState {
    /// Builds the state for the round following `h` under the schedule:
    /// `t = h.len() + 1`, `lambda = lambda_t`.
    pub fn build(
        h: &History,
        sched: &RegSchedule,
        delta: f64,
        s_bound: f64,
        warm: Option<&DVector<f64>>,
    ) -> Result<Self> {
        let t = h.len() as u64 + 1;
        let lambda = sched.lambda_at(t)?;
        Self::build_with_lambda(h, t, lambda, delta, s_bound, warm)
    }

    /// Builds the state with an explicit round index and regularization.
    pub fn build_with_lambda(
        h: &History,
        t: u64,
        lambda: f64,
        delta: f64,
        s_bound: f64,
        warm: Option<&DVector<f64>>,
    ) -> Result<Self> {
        let gamma = gamma_radius(t, h.dim(), lambda, delta, s_bound)?;
        let beta = beta_radius(gamma, lambda)?;
        let fit = fit_mle(h, lambda, &MleOptions::default(), warm)?;
        let link_at_hat = link_sum(h, &fit.theta, lambda)?;
        Ok(ConfidenceState {
            round: t,
            lambda,
            delta,
            s_bound,
            gamma,
            beta,
            loss_at_hat: fit.loss,
            link_at_hat,
            hess_at_hat: PdFactor::new(fit.hessian)?,
            theta_hat: fit.theta,
            mle_iterations: fit.iterations,
        })
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn s_bound(&self) -> f64 {
        self.s_bound
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn theta_hat(&self) -> &DVector<f64> {
        &self.theta_hat
    }

    pub fn loss_at_hat(&self) -> f64 {
        self.loss_at_hat
    }

    pub fn hessian_at_hat(&self) -> &PdFactor {
        &self.hess_at_hat
    }

    pub fn mle_iterations(&self) -> u32 {
        self.mle_iterations
    }

    pub fn dim(&self) -> usize {
        self.theta_hat.len()
    }

    /// The loss-gap bound `beta^2` defining the relaxed set.
    pub fn loss_budget(&self) -> f64 {
        self.beta * self.beta
    }

    fn check_inputs(&self, h: &History, theta: &DVector<f64>) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: theta.len() });
        }
        if theta.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { what: "theta coordinate" });
        }
        if h.len() as u64 + 1 != self.round {
            return Err(Error::Mismatch {
                what: format!("state built for round {}, history has {} rounds", self.round, h.len()),
            });
        }
        Ok(())
    }

    /// Whether the parameter ball constraint holds (with slack).
    pub fn in_param_ball(&self, theta: &DVector<f64>) -> bool {
        leq_with_slack(theta.norm(), self.s_bound)
    }

    /// Membership in the exact set: parameter ball plus
    /// `| link(theta) - link(theta_hat) |` in the inverse-Hessian-at-`theta`
    /// metric at most `gamma`. The Hessian is refactored per candidate —
    /// correctness over reuse.
    pub fn contains(&self, h: &History, theta: &DVector<f64>) -> Result<bool> {
        self.check_inputs(h, theta)?;
        if !self.in_param_ball(theta) {
            return Ok(false);
        }
        let diff = link_sum(h, theta, self.lambda)? - &self.link_at_hat;
        let factor = PdFactor::new(hessian(h, theta, self.lambda)?)?;
        Ok(leq_with_slack(factor.inv_norm(&diff)?, self.gamma))
    }

    /// Membership in the relaxed set: parameter ball plus loss gap at most
    /// `beta^2`.
    pub fn contains_relaxed(&self, h: &History, theta: &DVector<f64>) -> Result<bool> {
        self.check_inputs(h, theta)?;
        if !self.in_param_ball(theta) {
            return Ok(false);
        }
        let gap = log_loss(h, theta, self.lambda)? - self.loss_at_hat;
        Ok(leq_with_slack(gap, self.loss_budget()))
    }

    /// Loss gap of `theta` over the optimum (negative values possible only
    /// through the MLE tolerance).
    pub fn loss_gap(&self, h: &History, theta: &DVector<f64>) -> Result<f64> {
        self.check_inputs(h, theta)?;
        Ok(log_loss(h, theta, self.lambda)? - self.loss_at_hat)
    }

    /// Prediction-side feature sum at the MLE (including the ridge term).
    pub fn link_at_hat(&self) -> &DVector<f64> {
        &self.link_at_hat
    }

    /// Exact-set membership computed from caller-maintained running sums at
    /// `theta`: the data-only prediction sum `sum mu(x.theta) x` and the
    /// data-only Hessian `sum deriv(x.theta) x x'`. Equivalent to
    /// [`Self::contains`] without the history scan; used by incremental
    /// truth-parameter diagnostics.
    pub fn contains_from_sums(
        &self,
        theta: &DVector<f64>,
        data_link: &DVector<f64>,
        data_hess: &DMatrix<f64>,
    ) -> Result<bool> {
        if theta.len() != self.dim() || data_link.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: theta.len() });
        }
        if !self.in_param_ball(theta) {
            return Ok(false);
        }
        let link = data_link + theta * self.lambda;
        let diff = link - &self.link_at_hat;
        let mut hess = data_hess.clone();
        for i in 0..self.dim() {
            hess[(i, i)] += self.lambda;
        }
        let factor = PdFactor::new(hess)?;
        Ok(leq_with_slack(factor.inv_norm(&diff)?, self.gamma))
    }

    /// Relaxed-set membership computed from a caller-maintained data-only
    /// loss value at `theta`. Equivalent to [`Self::contains_relaxed`]
    /// without the history scan.
    pub fn contains_relaxed_from_sums(&self, theta: &DVector<f64>, data_loss: f64) -> bool {
        if !self.in_param_ball(theta) {
            return false;
        }
        let gap = data_loss + 0.5 * self.lambda * theta.norm_squared() - self.loss_at_hat;
        leq_with_slack(gap, self.loss_budget())
    }

    /// Deviation diagnostic from a caller-maintained data-only Hessian at the
    /// reference parameter: returns the same pair as [`deviation_bound`].
    pub fn deviation_from_sums(
        &self,
        theta: &DVector<f64>,
        theta_ref: &DVector<f64>,
        data_hess_ref: &DMatrix<f64>,
    ) -> Result<(f64, f64)> {
        let mut hess = data_hess_ref.clone();
        for i in 0..self.dim() {
            hess[(i, i)] += self.lambda;
        }
        let factor = PdFactor::new(hess)?;
        let lhs = factor.norm(&(theta - theta_ref))?;
        let rhs = 2.0 * (1.0 + 2.0 * self.s_bound) * self.gamma;
        Ok((lhs, rhs))
    }
}

/// Mean-slope analogue of the Hessian between two parameters:
/// `sum_s chord_slope(x_s.theta1, x_s.theta2) x_s x_s' + lambda I`.
///
/// Satisfies the exact mean-value identity
/// `link(theta1) - link(theta2) = G (theta1 - theta2)` and the sandwich
/// `G >= H(theta_i) / (1 + 2S)` for both endpoints inside the `S`-ball.
pub fn chord_hessian(
    h: &History,
    theta1: &DVector<f64>,
    theta2: &DVector<f64>,
    lambda: f64,
) -> Result<DMatrix<f64>> {
    let d = h.dim();
    for th in [theta1, theta2] {
        if th.len() != d {
            return Err(Error::Dimension { expected: d, got: th.len() });
        }
        if th.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { what: "theta coordinate" });
        }
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::Domain { what: format!("lambda must be >= 0, got {lambda}") });
    }
    let t1 = theta1.as_slice();
    let t2 = theta2.as_slice();
    let mut g = DMatrix::zeros(d, d);
    for (x, _) in h.rounds() {
        let z1: f64 = x.iter().zip(t1).map(|(a, b)| a * b).sum();
        let z2: f64 = x.iter().zip(t2).map(|(a, b)| a * b).sum();
        let w = chord_slope(z1, z2);
        for i in 0..d {
            let wx = w * x[i];
            for j in i..d {
                g[(i, j)] += wx * x[j];
            }
        }
    }
    for i in 0..d {
        g[(i, i)] += lambda;
        for j in (i + 1)..d {
            g[(j, i)] = g[(i, j)];
        }
    }
    Ok(g)
}

/// The good-event deviation diagnostic: returns
/// `(|theta - theta_ref|_{H(theta_ref)}, 2 (1 + 2S) gamma)`.
///
/// On rounds where both parameters sit in the exact set the left side is
/// provably below the right; callers assert or log the pair.
pub fn deviation_bound(
    theta: &DVector<f64>,
    theta_ref: &DVector<f64>,
    h: &History,
    state: &ConfidenceState,
) -> Result<(f64, f64)> {
    let factor = PdFactor::new(hessian(h, theta_ref, state.lambda())?)?;
    let lhs = factor.norm(&(theta - theta_ref))?;
    let rhs = 2.0 * (1.0 + 2.0 * state.s_bound()) * state.gamma();
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logistic::{logistic, logistic_deriv};
    use crate::problem::Arm;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn arm(coords: &[f64]) -> Arm {
        Arm::new(coords.to_vec()).unwrap()
    }

    fn random_state(
        rng: &mut ChaCha8Rng,
        d: usize,
        t_hist: usize,
        delta: f64,
        s: f64,
    ) -> (History, ConfidenceState) {
        let mut h = History::new(d);
        let env = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
        for _ in 0..t_hist {
            let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0) / (d as f64).sqrt()).collect();
            let a = arm(&v);
            let p = logistic(a.dot(&env));
            let r = rng.gen_bool(p);
            h.push(&a, r).unwrap();
        }
        let st = ConfidenceState::build(&h, &RegSchedule::new(d), delta, s, None).unwrap();
        (h, st)
    }

    #[test]
    fn build_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0F1);
        let (h, st) = random_state(&mut rng, 2, 40, 0.1, 2.0);
        assert_eq!(st.round(), 41);
        assert_relative_eq!(
            st.beta(),
            st.gamma() + st.gamma() * st.gamma() / st.lambda().sqrt(),
            epsilon = 1e-12
        );
        assert_relative_eq!(
            st.loss_at_hat(),
            log_loss(&h, st.theta_hat(), st.lambda()).unwrap(),
            epsilon = 1e-12
        );
        // The MLE itself belongs to both sets whenever it is in the ball.
        assert!(st.theta_hat().norm() <= 2.0);
        assert!(st.contains(&h, &st.theta_hat().clone()).unwrap());
        assert!(st.contains_relaxed(&h, &st.theta_hat().clone()).unwrap());
    }

    #[test]
    fn ball_constraint_rejects() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0F2);
        let (h, st) = random_state(&mut rng, 2, 10, 0.1, 1.0);
        let outside = DVector::from_vec(vec![1.1, 0.0]);
        assert!(!st.contains(&h, &outside).unwrap());
        assert!(!st.contains_relaxed(&h, &outside).unwrap());
    }

    #[test]
    fn exact_membership_matches_scalar_arithmetic() {
        // d = 1, single round: every quantity is closed-form checkable.
        let mut h = History::new(1);
        h.push(&arm(&[0.8]), true).unwrap();
        let (t, lambda, delta, s) = (2u64, 1.5, 0.1, 2.0);
        let st = ConfidenceState::build_with_lambda(&h, t, lambda, delta, s, None).unwrap();
        let hat = st.theta_hat()[0];

        let member = |theta: f64| -> bool {
            if theta.abs() > s * (1.0 + 2e-9) {
                return false;
            }
            let gdiff = 0.8 * (logistic(0.8 * theta) - logistic(0.8 * hat)) + lambda * (theta - hat);
            let hth = 0.64 * logistic_deriv(0.8 * theta) + lambda;
            gdiff.abs() / hth.sqrt() <= st.gamma() * (1.0 + 2e-9)
        };
        for theta in [-2.5, -2.0, -1.2, -0.3, 0.0, hat, 0.9, 1.7, 2.0, 2.4] {
            let got = st.contains(&h, &DVector::from_vec(vec![theta])).unwrap();
            assert_eq!(got, member(theta), "disagreement at theta = {theta}");
        }
    }

    #[test]
    fn relaxed_boundary_flips_along_rays() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0F3);
        for trial in 0..20 {
            let d = rng.gen_range(1..4);
            let t = rng.gen_range(5..80);
            // Large S so the loss boundary, not the ball, is the active
            // constraint along most rays.
            let (h, st) = random_state(&mut rng, d, t, 0.1, 25.0);
            let dir = {
                let v = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0f64));
                if v.norm() < 1e-6 {
                    continue;
                }
                v.normalize()
            };
            // The loss gap grows monotonically along the ray from the MLE;
            // bisect the crossing of the beta^2 budget.
            let gap_at =
                |u: f64| st.loss_gap(&h, &(st.theta_hat() + &dir * u)).unwrap() - st.loss_budget();
            let mut hi = 1.0;
            while gap_at(hi) < 0.0 && hi < 1e6 {
                hi *= 2.0;
            }
            if hi >= 1e6 {
                continue; // budget unreachable in this direction at this size
            }
            let mut lo = 0.0;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if gap_at(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let just_in = st.theta_hat() + &dir * (lo * (1.0 - 1e-6));
            let just_out = st.theta_hat() + &dir * (hi * (1.0 + 1e-5));
            if just_in.norm() <= st.s_bound() && just_out.norm() <= st.s_bound() {
                assert!(st.contains_relaxed(&h, &just_in).unwrap(), "trial {trial}");
                assert!(!st.contains_relaxed(&h, &just_out).unwrap(), "trial {trial}");
            }
        }
    }

    #[test]
    fn exact_set_is_contained_in_relaxed_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0F4);
        let mut hits = 0u32;
        for _ in 0..10 {
            let d = rng.gen_range(1..4);
            let t = rng.gen_range(0..60);
            let delta = *[0.05, 0.1, 0.3].iter().nth(rng.gen_range(0..3)).unwrap();
            let s = rng.gen_range(1.0..3.0);
            let (h, st) = random_state(&mut rng, d, t, delta, s);
            for _ in 0..500 {
                // Mix global samples with samples concentrated near the MLE
                // so the exact set is actually exercised.
                let theta = if rng.gen_bool(0.5) {
                    DVector::from_fn(d, |_, _| rng.gen_range(-s..s))
                } else {
                    st.theta_hat() + DVector::from_fn(d, |_, _| rng.gen_range(-0.5..0.5))
                };
                if theta.norm() > s {
                    continue;
                }
                if st.contains(&h, &theta).unwrap() {
                    hits += 1;
                    assert!(
                        st.contains_relaxed(&h, &theta).unwrap(),
                        "exact member escaped the relaxed set"
                    );
                }
            }
        }
        assert!(hits > 100, "containment test exercised too rarely ({hits} hits)");
    }

    #[test]
    fn relaxed_set_is_convex_along_segments() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0F5);
        for _ in 0..10 {
            let d = rng.gen_range(1..3);
            let t = rng.gen_range(3..50);
            let (h, st) = random_state(&mut rng, d, t, 0.1, 3.0);
            let mut members = Vec::new();
            for _ in 0..200 {
                let theta = st.theta_hat() + DVector::from_fn(d, |_, _| rng.gen_range(-1.5..1.5));
                if theta.norm() <= 3.0 && st.contains_relaxed(&h, &theta).unwrap() {
                    members.push(theta);
                }
                if members.len() == 2 {
                    break;
                }
            }
            if members.len() < 2 {
                continue;
            }
            for k in 0..=16 {
                let w = k as f64 / 16.0;
                let mid = &members[0] * (1.0 - w) + &members[1] * w;
                assert!(st.contains_relaxed(&h, &mid).unwrap(), "non-convex at w = {w}");
            }
        }
    }

    #[test]
    fn chord_hessian_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0F6);
        for _ in 0..50 {
            let d = rng.gen_range(1..4);
            let t = rng.gen_range(0..40);
            let mut h = History::new(d);
            for _ in 0..t {
                let v: Vec<f64> =
                    (0..d).map(|_| rng.gen_range(-1.0..1.0) / (d as f64).sqrt()).collect();
                h.push(&arm(&v), rng.gen_bool(0.5)).unwrap();
            }
            let lambda = rng.gen_range(0.2..4.0);
            let th1 = DVector::from_fn(d, |_, _| rng.gen_range(-2.0..2.0));
            let th2 = DVector::from_fn(d, |_, _| rng.gen_range(-2.0..2.0));

            // Equal endpoints collapse to the Hessian.
            let g_same = chord_hessian(&h, &th1, &th1, lambda).unwrap();
            assert!((&g_same - &hessian(&h, &th1, lambda).unwrap()).norm() < 1e-12);

            // Exact mean-value identity.
            let g = chord_hessian(&h, &th1, &th2, lambda).unwrap();
            let lhs = link_sum(&h, &th1, lambda).unwrap() - link_sum(&h, &th2, lambda).unwrap();
            let rhs = &g * (&th1 - &th2);
            assert!((lhs - rhs).norm() <= 1e-8);
        }

        // Empty history: just the ridge.
        let h = History::new(2);
        let z = DVector::zeros(2);
        let g = chord_hessian(&h, &z, &z, 2.0).unwrap();
        assert!((g - DMatrix::identity(2, 2) * 2.0).norm() < 1e-15);
    }

    #[test]
    fn chord_hessian_sandwich() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0F7);
        for _ in 0..200 {
            let d = rng.gen_range(1..4);
            let t = rng.gen_range(1..30);
            let s: f64 = rng.gen_range(1.0..3.0);
            let mut h = History::new(d);
            for _ in 0..t {
                let v: Vec<f64> =
                    (0..d).map(|_| rng.gen_range(-1.0..1.0) / (d as f64).sqrt()).collect();
                h.push(&arm(&v), rng.gen_bool(0.5)).unwrap();
            }
            let lambda = rng.gen_range(0.2..3.0);
            let sample_in_ball = |rng: &mut ChaCha8Rng| loop {
                let v = DVector::from_fn(d, |_, _| rng.gen_range(-s..s));
                if v.norm() <= s {
                    return v;
                }
            };
            let th1 = sample_in_ball(&mut rng);
            let th2 = sample_in_ball(&mut rng);
            let g = chord_hessian(&h, &th1, &th2, lambda).unwrap();
            let scale = 1.0 / (1.0 + 2.0 * s);
            for th in [&th1, &th2] {
                let diff = &g - hessian(&h, th, lambda).unwrap() * scale;
                let eig = diff.symmetric_eigenvalues();
                let min = eig.iter().cloned().fold(f64::MAX, f64::min);
                assert!(min >= -1e-8, "sandwich violated: min eigenvalue {min}");
            }
        }
    }

    #[test]
    fn deviation_bound_scalar_example() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0F8);
        let (h, st) = random_state(&mut rng, 2, 20, 0.1, 1.0);
        let (lhs, rhs) = deviation_bound(
            &st.theta_hat().clone(),
            &st.theta_hat().clone(),
            &h,
            &st,
        )
        .unwrap();
        assert_relative_eq!(lhs, 0.0, epsilon = 1e-12);
        // rhs = 2 (1 + 2S) gamma = 6 gamma at S = 1.
        assert_relative_eq!(rhs, 6.0 * st.gamma(), epsilon = 1e-12);
    }

    #[test]
    fn incremental_membership_agrees_with_history_scans() {
        use crate::logistic::log1p_exp;
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FA);
        for _ in 0..20 {
            let d = rng.gen_range(1..4);
            let t = rng.gen_range(1..50);
            let s = rng.gen_range(1.0..3.0);
            let (h, st) = random_state(&mut rng, d, t, 0.1, s);
            let theta = DVector::from_fn(d, |_, _| rng.gen_range(-s..s));

            // Rebuild the running sums a tracker would maintain.
            let mut data_link = DVector::zeros(d);
            let mut data_hess = DMatrix::zeros(d, d);
            let mut data_loss = 0.0;
            for (x, r) in h.rounds() {
                let z: f64 = x.iter().zip(theta.iter()).map(|(a, b)| a * b).sum();
                let xv = DVector::from_column_slice(x);
                data_link += &xv * logistic(z);
                data_hess += &xv * xv.transpose() * logistic_deriv(z);
                data_loss += log1p_exp(z) - f64::from(r as u8) * z;
            }

            assert_eq!(
                st.contains(&h, &theta).unwrap(),
                st.contains_from_sums(&theta, &data_link, &data_hess).unwrap()
            );
            assert_eq!(
                st.contains_relaxed(&h, &theta).unwrap(),
                st.contains_relaxed_from_sums(&theta, data_loss)
            );
            let (l1, r1) =
                deviation_bound(&st.theta_hat().clone(), &theta, &h, &st).unwrap();
            let (l2, r2) = st
                .deviation_from_sums(&st.theta_hat().clone(), &theta, &data_hess)
                .unwrap();
            assert_relative_eq!(l1, l2, epsilon = 1e-9, max_relative = 1e-9);
            assert_relative_eq!(r1, r2, epsilon = 1e-12);
        }
    }

    #[test]
    fn state_history_mismatch_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0F9);
        let (h, st) = random_state(&mut rng, 2, 10, 0.1, 1.0);
        let mut longer = h.clone();
        longer.push(&arm(&[0.5, 0.0]), true).unwrap();
        let theta = DVector::zeros(2);
        assert!(st.contains(&longer, &theta).is_err());
        assert!(st.contains_relaxed(&h, &DVector::zeros(3)).is_err());
    }
}
