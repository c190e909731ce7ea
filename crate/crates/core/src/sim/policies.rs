//! The policies the harness can run: the optimistic planner, a grid-scan
//! variant, a slope-scaled linear UCB baseline, epsilon-greedy, and two
//! fixed reference policies.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::logistic::logistic;
use crate::planning::{
    grid_members, plan_ball, plan_finite, BallWarm, FiniteWarm, PlanResult, SetChoice, SolverOpts,
};
use crate::problem::{Arm, ArmSet, ProblemInstance};

use super::{Decision, Policy, RoundView};

fn decision_from_plan(plan: PlanResult) -> Decision {
    Decision {
        arm: plan.arm,
        arm_index: plan.arm_index,
        optimistic_value: Some(plan.value),
        optimistic_theta: Some(plan.theta),
    }
}

/// Optimistic planning over the relaxed confidence set: per-arm support
/// maximization on finite sets, alternating direction/parameter
/// maximization on balls and spheres.
pub struct OfuLogR {
    solver: SolverOpts,
    /// Rounds before this index always solve cold (the set still moves
    /// quickly early on).
    cold_until: u64,
    /// Periodic cold re-solve to escape stale warm-start branches.
    refresh_every: u64,
    warm_ball: Option<BallWarm>,
    warm_finite: FiniteWarm,
}

impl OfuLogR {
    pub fn new() -> Self {
        OfuLogR {
            solver: SolverOpts::default(),
            cold_until: 50,
            refresh_every: 512,
            warm_ball: None,
            warm_finite: FiniteWarm::default(),
        }
    }

    pub fn with_solver(mut self, solver: SolverOpts) -> Self {
        self.solver = solver;
        self
    }
}

impl Default for OfuLogR {
    fn default() -> Self {
        Self::new()
    }
}

impl Policy for OfuLogR {
    fn name(&self) -> &'static str {
        "ofulog-r"
    }

    fn reset(&mut self, _seed: u64) {
        self.warm_ball = None;
        self.warm_finite = FiniteWarm::default();
    }

    fn choose(&mut self, view: &RoundView<'_>) -> Result<Decision> {
        let state = view.state();
        let plan = match view.arm_set {
            ArmSet::Finite(arms) => {
                plan_finite(view.history, state, arms, Some(&mut self.warm_finite), &self.solver)?
            }
            ArmSet::UnitBall { .. } | ArmSet::UnitSphere { .. } => {
                let cold = view.t < self.cold_until
                    || view.t % self.refresh_every == 0
                    || self.warm_ball.is_none();
                let warm = if cold { None } else { self.warm_ball.as_ref() };
                let plan = plan_ball(view.history, state, warm, &self.solver)?;
                self.warm_ball = BallWarm::from_plan(&plan);
                plan
            }
        };
        Ok(decision_from_plan(plan))
    }
}

/// Brute-force variant of the optimistic policy: scans a membership-filtered
/// parameter grid each round. Only for low dimensions and short horizons;
/// serves as a decision-level cross-check of the planner.
pub struct OfuLogGrid {
    pub resolution: usize,
    pub choice: SetChoice,
}

impl OfuLogGrid {
    pub fn new(resolution: usize, choice: SetChoice) -> Self {
        OfuLogGrid { resolution, choice }
    }
}

impl Policy for OfuLogGrid {
    fn name(&self) -> &'static str {
        "ofulog-grid"
    }

    fn reset(&mut self, _seed: u64) {}

    fn choose(&mut self, view: &RoundView<'_>) -> Result<Decision> {
        let state = view.state();
        let mut members = grid_members(view.history, state, self.resolution, self.choice)?;
        if state.in_param_ball(state.theta_hat()) {
            members.push(state.theta_hat().clone());
        }
        if members.is_empty() {
            return Err(Error::Planner {
                what: "no grid point satisfied the membership test".into(),
            });
        }
        match view.arm_set {
            ArmSet::Finite(arms) => {
                let mut best: Option<(usize, f64, &DVector<f64>)> = None;
                for (i, arm) in arms.iter().enumerate() {
                    for m in &members {
                        let v = arm.dot(m);
                        if best.map_or(true, |(_, bv, _)| v > bv) {
                            best = Some((i, v, m));
                        }
                    }
                }
                let (i, v, m) = best.expect("non-empty members and arms");
                Ok(Decision {
                    arm: arms[i].clone(),
                    arm_index: Some(i),
                    optimistic_value: Some(v),
                    optimistic_theta: Some(m.clone()),
                })
            }
            ArmSet::UnitBall { .. } | ArmSet::UnitSphere { .. } => {
                let (norm, m) = members
                    .iter()
                    .map(|m| (m.norm(), m))
                    .max_by(|a, b| a.0.total_cmp(&b.0))
                    .expect("non-empty members");
                let arm = if norm > 1e-12 {
                    Arm::unit_from(m)?
                } else {
                    let d = view.history.dim();
                    Arm::new((0..d).map(|i| f64::from(u8::from(i == 0))).collect())?
                };
                Ok(Decision {
                    arm,
                    arm_index: None,
                    optimistic_value: Some(norm),
                    optimistic_theta: Some(m.clone()),
                })
            }
        }
    }
}

/// Linear-surrogate UCB baseline: scores each arm by the MLE's predicted
/// reward plus a slope-scaled elliptical bonus. The scale `kappa` pays the
/// worst-case slope price up front, which is exactly the behavior the
/// optimistic planner avoids.
pub struct GlmUcb {
    kappa: f64,
    seen: usize,
    design: Option<DMatrix<f64>>,
    dictionary: Vec<Arm>,
}

impl GlmUcb {
    pub fn new(kappa: f64) -> Self {
        GlmUcb { kappa, seen: 0, design: None, dictionary: Vec::new() }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

impl Policy for GlmUcb {
    fn name(&self) -> &'static str {
        "glm-ucb"
    }

    fn reset(&mut self, _seed: u64) {
        self.seen = 0;
        self.design = None;
        self.dictionary.clear();
    }

    fn choose(&mut self, view: &RoundView<'_>) -> Result<Decision> {
        let state = view.state();
        let d = view.history.dim();
        let design = self.design.get_or_insert_with(|| DMatrix::zeros(d, d));
        while self.seen < view.history.len() {
            let x = DVector::from_column_slice(view.history.arm_features(self.seen));
            design.ger(1.0, &x, &x, 1.0);
            self.seen += 1;
        }
        if self.dictionary.is_empty() {
            self.dictionary = match view.arm_set {
                ArmSet::Finite(arms) => arms.clone(),
                set => set.discretize()?,
            };
        }
        let finite = view.arm_set.is_finite();

        let v = design.clone() + DMatrix::identity(d, d) * state.lambda();
        let chol = v.cholesky().ok_or(Error::NotPositiveDefinite)?;
        let bonus_scale = self.kappa * state.gamma();
        let theta_hat = state.theta_hat();

        let mut best: Option<(usize, f64)> = None;
        for (i, arm) in self.dictionary.iter().enumerate() {
            let x = arm.coords();
            let width = chol.solve(x).dot(x).sqrt();
            let score = logistic(arm.dot(theta_hat)) + bonus_scale * width;
            if best.map_or(true, |(_, bs)| score > bs) {
                best = Some((i, score));
            }
        }
        let (i, score) = best.ok_or(Error::EmptyArmSet)?;
        Ok(Decision {
            arm: self.dictionary[i].clone(),
            arm_index: finite.then_some(i),
            optimistic_value: Some(score),
            optimistic_theta: None,
        })
    }
}

/// Draws a uniformly random unit vector (Box-Muller normals, normalized).
fn uniform_direction(rng: &mut ChaCha8Rng, d: usize) -> DVector<f64> {
    loop {
        let mut v = DVector::zeros(d);
        let mut i = 0;
        while i < d {
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen();
            let r = (-2.0 * u1.ln()).sqrt();
            let angle = std::f64::consts::TAU * u2;
            v[i] = r * angle.cos();
            i += 1;
            if i < d {
                v[i] = r * angle.sin();
                i += 1;
            }
        }
        let n = v.norm();
        if n > 1e-9 {
            return v / n;
        }
    }
}

/// Epsilon-greedy on the MLE: explore uniformly with probability `epsilon`,
/// otherwise play the arm the fitted parameter ranks best.
pub struct EpsGreedy {
    epsilon: f64,
    rng: ChaCha8Rng,
}

impl EpsGreedy {
    pub fn new(epsilon: f64) -> Self {
        EpsGreedy { epsilon, rng: ChaCha8Rng::seed_from_u64(0) }
    }
}

impl Policy for EpsGreedy {
    fn name(&self) -> &'static str {
        "eps-greedy"
    }

    fn reset(&mut self, seed: u64) {
        // Distinct stream from the engine's reward noise.
        self.rng = ChaCha8Rng::seed_from_u64(seed ^ 0xE15_0A11);
    }

    fn choose(&mut self, view: &RoundView<'_>) -> Result<Decision> {
        let explore = self.rng.gen::<f64>() < self.epsilon;
        match view.arm_set {
            ArmSet::Finite(arms) => {
                if arms.is_empty() {
                    return Err(Error::EmptyArmSet);
                }
                let i = if explore {
                    self.rng.gen_range(0..arms.len())
                } else {
                    let theta_hat = view.state().theta_hat();
                    let mut best = (0, f64::NEG_INFINITY);
                    for (i, arm) in arms.iter().enumerate() {
                        let v = arm.dot(theta_hat);
                        if v > best.1 {
                            best = (i, v);
                        }
                    }
                    best.0
                };
                Ok(Decision {
                    arm: arms[i].clone(),
                    arm_index: Some(i),
                    optimistic_value: None,
                    optimistic_theta: None,
                })
            }
            ArmSet::UnitBall { dim, .. } | ArmSet::UnitSphere { dim, .. } => {
                let dir = if explore {
                    uniform_direction(&mut self.rng, *dim)
                } else {
                    let theta_hat = view.state().theta_hat();
                    if theta_hat.norm() > 1e-9 {
                        theta_hat.normalize()
                    } else {
                        DVector::from_fn(*dim, |i, _| f64::from(u8::from(i == 0)))
                    }
                };
                Ok(Decision {
                    arm: Arm::unit_from(&dir)?,
                    arm_index: None,
                    optimistic_value: None,
                    optimistic_theta: None,
                })
            }
        }
    }
}

/// Plays one fixed arm forever. Reference policy for regret floors and for
/// the worst-case constructions.
pub struct BestFixed {
    arm: Arm,
    arm_index: Option<usize>,
}

impl BestFixed {
    /// Fixes the arm that is best under the given instance's truth.
    pub fn for_instance(inst: &ProblemInstance) -> Result<Self> {
        let best = inst.best_arm()?;
        Ok(BestFixed { arm: best.arm, arm_index: best.index })
    }

    /// Fixes an arbitrary arm.
    pub fn pinned(arm: Arm, arm_index: Option<usize>) -> Self {
        BestFixed { arm, arm_index }
    }
}

impl Policy for BestFixed {
    fn name(&self) -> &'static str {
        "best-fixed"
    }

    fn reset(&mut self, _seed: u64) {}

    fn choose(&mut self, _view: &RoundView<'_>) -> Result<Decision> {
        Ok(Decision {
            arm: self.arm.clone(),
            arm_index: self.arm_index,
            optimistic_value: None,
            optimistic_theta: None,
        })
    }

    fn needs_state(&self) -> bool {
        false
    }
}

/// Cycles deterministically through a fixed dictionary; the sampling policy
/// behind coverage estimation.
pub struct RoundRobin {
    arms: Vec<Arm>,
    next: usize,
}

impl RoundRobin {
    pub fn new(arms: Vec<Arm>) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::EmptyArmSet);
        }
        Ok(RoundRobin { arms, next: 0 })
    }
}

impl Policy for RoundRobin {
    fn name(&self) -> &'static str {
        "round-robin"
    }

    fn reset(&mut self, _seed: u64) {
        self.next = 0;
    }

    fn choose(&mut self, _view: &RoundView<'_>) -> Result<Decision> {
        let i = self.next;
        self.next = (self.next + 1) % self.arms.len();
        Ok(Decision {
            arm: self.arms[i].clone(),
            arm_index: Some(i),
            optimistic_value: None,
            optimistic_theta: None,
        })
    }

    fn needs_state(&self) -> bool {
        false
    }
}
