//! Worst-case instance packing and the information-theoretic diagnostics
//! behind the lower-bound experiment.
//!
//! The construction places the nominal parameter on the first axis and
//! perturbs every remaining coordinate by `±epsilon`, giving `2^(d-1)`
//! members that agree on the first coordinate but differ in directions a
//! fixed policy cannot distinguish quickly. The perturbation size is
//! calibrated so that, at horizon `T` and slope constant `kappa`, no policy
//! can beat order `d sqrt(T / kappa)` regret on every member at once.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::estimation::History;
use crate::logistic::{logistic, logistic_deriv};

/// The members cap: `2^(d-1)` grows fast, and the experiment is meant for
/// small dimensions.
const MAX_PACKING_COORDS: usize = 16;

/// A sign-pattern packing around an axis-aligned nominal parameter.
#[derive(Debug, Clone)]
pub struct Packing {
    nominal: DVector<f64>,
    epsilon: f64,
    members: Vec<DVector<f64>>,
}

impl Packing {
    pub fn nominal(&self) -> &DVector<f64> {
        &self.nominal
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn members(&self) -> &[DVector<f64>] {
        &self.members
    }

    /// Norm shared by every member: `sqrt(c^2 + (d-1) eps^2)`.
    pub fn member_norm(&self) -> f64 {
        self.members[0].norm()
    }
}

/// Builds the `2^(d-1)` sign-pattern members around `theta_star = c e1`.
///
/// The nominal parameter must lie exactly on the first axis with a positive
/// first coordinate, and the perturbation must keep members within the
/// nominal norm's packing cap `c / sqrt(d-1)`.
pub fn build_packing(theta_star: &DVector<f64>, epsilon: f64) -> Result<Packing> {
    let d = theta_star.len();
    if d < 2 {
        return Err(Error::Domain {
            what: "packing construction needs dimension >= 2".into(),
        });
    }
    if d - 1 > MAX_PACKING_COORDS {
        return Err(Error::Unsupported {
            what: format!("packing with 2^{} members is not supported", d - 1),
        });
    }
    let c = theta_star[0];
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::Domain {
            what: format!("nominal first coordinate must be positive, got {c}"),
        });
    }
    if theta_star.iter().skip(1).any(|&z| z != 0.0) {
        return Err(Error::Domain {
            what: "nominal parameter must lie exactly on the first axis".into(),
        });
    }
    let cap = c / ((d - 1) as f64).sqrt();
    if !(epsilon > 0.0 && epsilon.is_finite() && epsilon <= cap) {
        return Err(Error::Domain {
            what: format!("perturbation must lie in (0, {cap}], got {epsilon}"),
        });
    }
    let count = 1usize << (d - 1);
    let mut members = Vec::with_capacity(count);
    for mask in 0..count {
        let mut m = DVector::zeros(d);
        m[0] = c;
        for j in 0..(d - 1) {
            let sign = if mask & (1 << j) == 0 { 1.0 } else { -1.0 };
            m[j + 1] = sign * epsilon;
        }
        members.push(m);
    }
    Ok(Packing { nominal: theta_star.clone(), epsilon, members })
}

/// Negates one perturbed coordinate (`1 <= coord < d`) of a member,
/// producing its nearest packing neighbor.
pub fn flip(member: &DVector<f64>, coord: usize) -> Result<DVector<f64>> {
    if coord == 0 || coord >= member.len() {
        return Err(Error::Domain {
            what: format!("flip coordinate must lie in 1..{}, got {coord}", member.len()),
        });
    }
    let mut out = member.clone();
    out[coord] = -out[coord];
    Ok(out)
}

/// The horizon-calibrated perturbation `eps^2 = sqrt(kappa / T) / 32`.
pub fn epsilon_for_horizon(kappa: f64, horizon: u64) -> Result<f64> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::Domain { what: format!("kappa must be positive, got {kappa}") });
    }
    if horizon == 0 {
        return Err(Error::Domain { what: "horizon must be at least 1".into() });
    }
    Ok(((kappa / horizon as f64).sqrt() / 32.0).sqrt())
}

/// Exact Kullback-Leibler divergence between Bernoulli means.
pub fn kl_bernoulli(p: f64, q: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&q));
    let left = if p > 0.0 { p * (p / q).ln() } else { 0.0 };
    let right = if p < 1.0 { (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln() } else { 0.0 };
    left + right
}

/// Chi-squared upper bound on the reward-trajectory divergence between two
/// parameters along a played history:
/// `sum_s (mu(x_s.theta) - mu(x_s.theta_alt))^2 / deriv(x_s.theta_alt)`.
///
/// Dominates the exact Bernoulli divergence round for round, so a small
/// value certifies that the two parameters were statistically hard to tell
/// apart on this trajectory.
pub fn kl_traj_bound(
    h: &History,
    theta: &DVector<f64>,
    theta_alt: &DVector<f64>,
) -> Result<f64> {
    let d = h.dim();
    for th in [theta, theta_alt] {
        if th.len() != d {
            return Err(Error::Dimension { expected: d, got: th.len() });
        }
    }
    let a = theta.as_slice();
    let b = theta_alt.as_slice();
    let mut total = 0.0;
    for (x, _) in h.rounds() {
        let z: f64 = x.iter().zip(a).map(|(u, v)| u * v).sum();
        let za: f64 = x.iter().zip(b).map(|(u, v)| u * v).sum();
        let diff = logistic(z) - logistic(za);
        total += diff * diff / logistic_deriv(za);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Arm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn packing_members_have_the_expected_shape() {
        let nominal = DVector::from_vec(vec![2.0, 0.0, 0.0]);
        let p = build_packing(&nominal, 0.5).unwrap();
        assert_eq!(p.members().len(), 4);
        let shared: f64 = (4.0f64 + 2.0 * 0.25).sqrt();
        for m in p.members() {
            assert_eq!(m[0], 2.0);
            assert_eq!(m[1].abs(), 0.5);
            assert_eq!(m[2].abs(), 0.5);
            approx::assert_relative_eq!(m.norm(), shared, epsilon = 1e-15);
        }
        // First member carries all-positive perturbations.
        assert_eq!(p.members()[0][1], 0.5);
        assert_eq!(p.members()[0][2], 0.5);
        // All sign patterns are distinct.
        let signs: std::collections::BTreeSet<Vec<i8>> = p
            .members()
            .iter()
            .map(|m| m.iter().skip(1).map(|&z| z.signum() as i8).collect())
            .collect();
        assert_eq!(signs.len(), 4);
    }

    #[test]
    fn construction_rejects_bad_nominals_and_oversized_perturbations() {
        let off_axis = DVector::from_vec(vec![2.0, 0.1]);
        assert!(build_packing(&off_axis, 0.1).is_err());
        let negative = DVector::from_vec(vec![-2.0, 0.0]);
        assert!(build_packing(&negative, 0.1).is_err());
        let nominal = DVector::from_vec(vec![2.0, 0.0, 0.0]);
        // Cap is 2 / sqrt(2) = 1.414...; just above must fail.
        assert!(build_packing(&nominal, 1.42).is_err());
        assert!(build_packing(&nominal, 1.41).is_ok());
        let one_dim = DVector::from_vec(vec![2.0]);
        assert!(build_packing(&one_dim, 0.1).is_err());
    }

    #[test]
    fn flip_negates_one_coordinate_and_is_an_involution() {
        let nominal = DVector::from_vec(vec![2.0, 0.0, 0.0]);
        let p = build_packing(&nominal, 0.3).unwrap();
        let m = &p.members()[0];
        let f = flip(m, 2).unwrap();
        assert_eq!(f[0], m[0]);
        assert_eq!(f[1], m[1]);
        assert_eq!(f[2], -m[2]);
        assert_eq!(flip(&f, 2).unwrap(), *m);
        assert!(flip(m, 0).is_err());
        assert!(flip(m, 3).is_err());
        // The flipped member is itself a packing member.
        assert!(p.members().iter().any(|mm| *mm == f));
    }

    #[test]
    fn horizon_calibration_matches_frozen_values() {
        approx::assert_relative_eq!(
            epsilon_for_horizon(1024.0, 1024).unwrap(),
            0.1767766952966369,
            epsilon = 1e-16
        );
        approx::assert_relative_eq!(
            epsilon_for_horizon(5.0, 10_000).unwrap(),
            0.026434281586014102,
            epsilon = 1e-16
        );
        assert!(epsilon_for_horizon(0.0, 10).is_err());
        assert!(epsilon_for_horizon(4.0, 0).is_err());
        // Longer horizons shrink the perturbation.
        let e1 = epsilon_for_horizon(5.0, 100).unwrap();
        let e2 = epsilon_for_horizon(5.0, 10_000).unwrap();
        assert!(e2 < e1);
    }

    #[test]
    fn chi2_bound_matches_a_hand_computed_round() {
        let mut h = History::new(1);
        h.push(&Arm::new(vec![1.0]).unwrap(), true).unwrap();
        let theta = DVector::from_vec(vec![0.8]);
        let alt = DVector::from_vec(vec![-0.3]);
        let got = kl_traj_bound(&h, &theta, &alt).unwrap();
        approx::assert_relative_eq!(got, 0.28600520193261003, epsilon = 1e-15);
        // And the exact divergence for the same pair sits below it.
        approx::assert_relative_eq!(
            kl_bernoulli(logistic(0.8), logistic(-0.3)),
            0.14222650776112328,
            epsilon = 1e-15
        );
    }

    #[test]
    fn chi2_dominates_the_exact_divergence() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x10B);
        for _ in 0..2000 {
            let z: f64 = rng.gen_range(-6.0..6.0);
            let za: f64 = rng.gen_range(-6.0..6.0);
            let mut h = History::new(1);
            h.push(&Arm::new(vec![1.0]).unwrap(), false).unwrap();
            let chi2 = kl_traj_bound(
                &h,
                &DVector::from_vec(vec![z]),
                &DVector::from_vec(vec![za]),
            )
            .unwrap();
            let exact = kl_bernoulli(logistic(z), logistic(za));
            assert!(
                chi2 >= exact - 1e-12,
                "chi2 {chi2} fell below exact divergence {exact} at ({z}, {za})"
            );
        }
    }

    #[test]
    fn trajectory_bound_sums_over_rounds() {
        let mut h = History::new(2);
        h.push(&Arm::new(vec![1.0, 0.0]).unwrap(), true).unwrap();
        h.push(&Arm::new(vec![0.0, 1.0]).unwrap(), false).unwrap();
        let theta = DVector::from_vec(vec![0.5, -0.2]);
        let alt = DVector::from_vec(vec![0.1, 0.4]);
        let total = kl_traj_bound(&h, &theta, &alt).unwrap();
        let per_round = |z: f64, za: f64| {
            let diff = logistic(z) - logistic(za);
            diff * diff / logistic_deriv(za)
        };
        approx::assert_relative_eq!(
            total,
            per_round(0.5, 0.1) + per_round(-0.2, 0.4),
            epsilon = 1e-15
        );
    }
}
