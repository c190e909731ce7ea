//! Problem geometry: arms, arm sets, instances, and the slope constants.
//!
//! An instance is a true parameter `theta_star` inside the radius-`s_bound`
//! ball together with an arm set contained in the unit ball. The difficulty
//! of an instance is captured by the inverse-slope constants reported by
//! [`kappa_summary`]: the flatter the sigmoid at the logits the learner can
//! reach, the slower raw information accrues, and `kappa_*` grades that from
//! "at the optimum" to "worst case over everything".

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logistic::{logistic_deriv, logistic};

/// Slack for membership of arm norms in the unit ball, absorbing rounding in
/// e.g. normalized directions.
const ARM_NORM_SLACK: f64 = 1e-9;

/// A single action: a feature vector inside the unit ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arm(DVector<f64>);

impl Arm {
    /// Builds an arm, rejecting non-finite coordinates and norms above 1.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Domain {
                what: "arm must have at least one coordinate".into(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { what: "arm coordinate" });
        }
        let v = DVector::from_vec(coords);
        let norm = v.norm();
        if norm > 1.0 + ARM_NORM_SLACK {
            return Err(Error::ArmNorm { norm });
        }
        Ok(Arm(v))
    }

    /// The unit vector along `direction`; errors on (numerically) zero input.
    pub fn unit_from(direction: &DVector<f64>) -> Result<Self> {
        let norm = direction.norm();
        if norm <= f64::EPSILON {
            return Err(Error::DegenerateDirection);
        }
        Ok(Arm(direction / norm))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    /// Inner product with a parameter vector.
    pub fn dot(&self, theta: &DVector<f64>) -> f64 {
        self.0.dot(theta)
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

/// The action set available every round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ArmSet {
    /// An explicit dictionary of arms.
    Finite(Vec<Arm>),
    /// The full unit ball; `resolution` is an optional boundary
    /// discretization (points per full circle, `d = 2`) used by planners and
    /// oracles that need a finite search.
    UnitBall { dim: usize, resolution: Option<u32> },
    /// The unit sphere, same discretization convention as the ball.
    UnitSphere { dim: usize, resolution: Option<u32> },
}

impl ArmSet {
    pub fn validate(&self) -> Result<()> {
        match self {
            ArmSet::Finite(arms) => {
                if arms.is_empty() {
                    return Err(Error::EmptyArmSet);
                }
                let d = arms[0].dim();
                for a in arms {
                    if a.dim() != d {
                        return Err(Error::Dimension { expected: d, got: a.dim() });
                    }
                }
                Ok(())
            }
            ArmSet::UnitBall { dim, resolution } | ArmSet::UnitSphere { dim, resolution } => {
                if *dim == 0 {
                    return Err(Error::Domain { what: "arm set dimension must be positive".into() });
                }
                if let Some(r) = resolution {
                    if *r < 8 {
                        return Err(Error::Domain {
                            what: format!("discretization resolution {r} below minimum 8"),
                        });
                    }
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ArmSet::Finite(arms) => arms.first().map_or(0, Arm::dim),
            ArmSet::UnitBall { dim, .. } | ArmSet::UnitSphere { dim, .. } => *dim,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ArmSet::Finite(_))
    }

    pub fn resolution(&self) -> Option<u32> {
        match self {
            ArmSet::Finite(_) => None,
            ArmSet::UnitBall { resolution, .. } | ArmSet::UnitSphere { resolution, .. } => {
                *resolution
            }
        }
    }

    /// A finite stand-in usable for sweeps and index-based baselines: the
    /// dictionary itself, or `resolution` equally spaced boundary points for
    /// `d = 2` balls/spheres (boundary points suffice because every linear
    /// and every UCB-style score is maximized on the boundary).
    pub fn discretize(&self) -> Result<Vec<Arm>> {
        match self {
            ArmSet::Finite(arms) => Ok(arms.clone()),
            ArmSet::UnitBall { dim, resolution } | ArmSet::UnitSphere { dim, resolution } => {
                if *dim != 2 {
                    return Err(Error::Unsupported {
                        what: format!("ring discretization needs d = 2, got d = {dim}"),
                    });
                }
                let r = resolution.unwrap_or(720);
                let mut arms = Vec::with_capacity(r as usize);
                for k in 0..r {
                    let angle = 2.0 * std::f64::consts::PI * f64::from(k) / f64::from(r);
                    arms.push(Arm::unit_from(&DVector::from_vec(vec![
                        angle.cos(),
                        angle.sin(),
                    ]))?);
                }
                Ok(arms)
            }
        }
    }
}

/// A fully specified environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    theta_star: DVector<f64>,
    s_bound: f64,
    arm_set: ArmSet,
}

impl ProblemInstance {
    pub fn new(theta_star: Vec<f64>, s_bound: f64, arm_set: ArmSet) -> Result<Self> {
        if theta_star.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { what: "theta_star coordinate" });
        }
        if !s_bound.is_finite() || s_bound <= 0.0 {
            return Err(Error::Domain { what: format!("s_bound must be positive, got {s_bound}") });
        }
        arm_set.validate()?;
        let theta_star = DVector::from_vec(theta_star);
        if arm_set.dim() != theta_star.len() {
            return Err(Error::Dimension { expected: theta_star.len(), got: arm_set.dim() });
        }
        if theta_star.norm() > s_bound * (1.0 + 1e-12) {
            return Err(Error::Domain {
                what: format!(
                    "theta_star norm {} exceeds s_bound {}",
                    theta_star.norm(),
                    s_bound
                ),
            });
        }
        Ok(ProblemInstance { theta_star, s_bound, arm_set })
    }

    pub fn theta_star(&self) -> &DVector<f64> {
        &self.theta_star
    }

    pub fn s_bound(&self) -> f64 {
        self.s_bound
    }

    pub fn arm_set(&self) -> &ArmSet {
        &self.arm_set
    }

    pub fn dim(&self) -> usize {
        self.theta_star.len()
    }

    /// Best arm under the true parameter.
    pub fn best_arm(&self) -> Result<BestArm> {
        best_arm(&self.arm_set, &self.theta_star)
    }

    /// Expected reward of `arm` under the true parameter.
    pub fn expected_reward(&self, arm: &Arm) -> f64 {
        logistic(arm.dot(&self.theta_star))
    }

    /// Stable content digest, used to tie experiment outputs back to the
    /// instance that produced them.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_vec(self).expect("instance serializes"));
        hex::encode(&hasher.finalize()[..16])
    }
}

/// Result of a linear argmax over an arm set.
#[derive(Debug, Clone, PartialEq)]
pub struct BestArm {
    /// Index into the dictionary for finite sets; `None` on balls/spheres.
    pub index: Option<usize>,
    pub arm: Arm,
    /// The attained value `arm . theta`.
    pub value: f64,
}

/// Maximizes `x . theta` over the arm set.
///
/// Finite sets scan the dictionary with ties broken toward the lowest index;
/// balls and spheres return `theta / |theta|` (errors on `theta = 0`, where
/// every direction is equally good and downstream constants are undefined).
pub fn best_arm(arm_set: &ArmSet, theta: &DVector<f64>) -> Result<BestArm> {
    match arm_set {
        ArmSet::Finite(arms) => {
            if arms.is_empty() {
                return Err(Error::EmptyArmSet);
            }
            let mut best = 0usize;
            let mut best_value = arms[0].dot(theta);
            for (i, a) in arms.iter().enumerate().skip(1) {
                let v = a.dot(theta);
                if v > best_value {
                    best = i;
                    best_value = v;
                }
            }
            Ok(BestArm { index: Some(best), arm: arms[best].clone(), value: best_value })
        }
        ArmSet::UnitBall { .. } | ArmSet::UnitSphere { .. } => {
            let arm = Arm::unit_from(theta)?;
            let value = arm.dot(theta);
            Ok(BestArm { index: None, arm, value })
        }
    }
}

/// The inverse-slope constants of an instance, ordered
/// `4 <= kappa_star <= kappa_x <= kappa_global`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaSummary {
    /// `1 / mu'` at the optimal arm's logit: the cost that matters
    /// asymptotically.
    pub kappa_star: f64,
    /// Worst `1 / mu'` over the arm set at the true parameter.
    pub kappa_x: f64,
    /// Worst `1 / mu'` over arm set and the whole parameter ball: the
    /// classical constant pessimistic algorithms pay.
    pub kappa_global: f64,
}

/// Computes the three slope constants for an instance.
pub fn kappa_summary(inst: &ProblemInstance) -> Result<KappaSummary> {
    let theta = inst.theta_star();
    let s = inst.s_bound();
    let best = inst.best_arm()?;
    let kappa_star = 1.0 / logistic_deriv(best.value);
    let (kappa_x, kappa_global) = match inst.arm_set() {
        ArmSet::Finite(arms) => {
            let mut kx = f64::MIN;
            let mut kg = f64::MIN;
            for a in arms {
                kx = kx.max(1.0 / logistic_deriv(a.dot(theta)));
                // Worst theta in the s-ball for this arm is full
                // (anti-)alignment; mu' is even, so the sign is irrelevant.
                kg = kg.max(1.0 / logistic_deriv(s * a.norm()));
            }
            (kx, kg)
        }
        ArmSet::UnitBall { .. } | ArmSet::UnitSphere { .. } => {
            // The extreme logit over the set is +-|theta_star|, so the
            // at-truth worst case coincides with the optimum's slope.
            (1.0 / logistic_deriv(theta.norm()), 1.0 / logistic_deriv(s))
        }
    };
    Ok(KappaSummary { kappa_star, kappa_x, kappa_global })
}

/// The detrimental arms of an instance: the region where optimism is allowed
/// to dwell only transiently.
///
/// When the optimal logit is positive these are the arms with logit at most
/// `-1`; otherwise (flat instances) the arms whose slope is at most half the
/// optimum's slope.
#[derive(Debug, Clone, PartialEq)]
pub struct DetrimentalSet {
    theta_star: DVector<f64>,
    rule: Rule,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Rule {
    /// `x . theta_star <= -1`.
    LogitFloor,
    /// `mu'(x . theta_star) <= cutoff`, with `cutoff = mu'(best logit) / 2`.
    SlopeFloor { cutoff: f64 },
}

impl DetrimentalSet {
    pub fn contains(&self, arm: &Arm) -> bool {
        let z = arm.dot(&self.theta_star);
        match self.rule {
            Rule::LogitFloor => z <= -1.0,
            Rule::SlopeFloor { cutoff } => logistic_deriv(z) <= cutoff,
        }
    }

    /// Indices of detrimental arms for finite sets; `None` otherwise.
    pub fn finite_indices(&self, arm_set: &ArmSet) -> Option<Vec<usize>> {
        match arm_set {
            ArmSet::Finite(arms) => Some(
                arms.iter()
                    .enumerate()
                    .filter(|(_, a)| self.contains(a))
                    .map(|(i, _)| i)
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Human-readable description of the active membership rule.
    pub fn describe(&self) -> String {
        match self.rule {
            Rule::LogitFloor => "logit <= -1".to_string(),
            Rule::SlopeFloor { cutoff } => format!("slope <= {cutoff:.6e}"),
        }
    }
}

/// Classifies the instance's detrimental region.
pub fn detrimental_set(inst: &ProblemInstance) -> Result<DetrimentalSet> {
    let best = inst.best_arm()?;
    let rule = if best.value > 0.0 {
        Rule::LogitFloor
    } else {
        Rule::SlopeFloor { cutoff: 0.5 * logistic_deriv(best.value) }
    };
    Ok(DetrimentalSet { theta_star: inst.theta_star().clone(), rule })
}
