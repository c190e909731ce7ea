//! Experiment configuration: a TOML schema with strict validation and a
//! canonical digest for manifests.
//!
//! A config names one experiment `kind`, describes the problem instance, and
//! carries one section of kind-specific knobs. Unknown keys are rejected at
//! parse time; semantic problems (zero horizons, out-of-range probabilities,
//! oversized packing perturbations) are reported with the offending key.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{Arm, ArmSet, ProblemInstance};

/// Which experiment a config describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    /// Single-policy episode runs on one instance.
    Run,
    /// Confidence-set coverage estimation under a fixed dictionary.
    Coverage,
    /// Regret scaling across parameter norms.
    Scaling,
    /// Transitory-phase diagnostics on a finite set with a detrimental arm.
    Transitory,
    /// Packing-based worst-case lower-bound experiment.
    Lowerbound,
    /// Randomized verification of the analytic inequalities.
    VerifyLemmas,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Run => "run",
            Kind::Coverage => "coverage",
            Kind::Scaling => "scaling",
            Kind::Transitory => "transitory",
            Kind::Lowerbound => "lowerbound",
            Kind::VerifyLemmas => "verify-lemmas",
        }
    }
}

/// Arm-set description in config form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ArmSetConfig {
    /// An explicit list of feature vectors, each of norm at most one.
    Finite { arms: Vec<Vec<f64>> },
    /// The full unit ball; `resolution` controls discretized fallbacks.
    Ball {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        resolution: Option<u32>,
    },
    /// The unit sphere; `resolution` controls discretized fallbacks.
    Sphere {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        resolution: Option<u32>,
    },
}

/// Problem-instance section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub theta_star: Vec<f64>,
    /// Parameter-ball radius; defaults to `max(1, |theta_star|)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_bound: Option<f64>,
    pub arm_set: ArmSetConfig,
}

impl InstanceConfig {
    /// Radius actually used: the configured one, or `max(1, |theta_star|)`.
    pub fn resolved_s_bound(&self) -> f64 {
        self.s_bound.unwrap_or_else(|| {
            let norm = self.theta_star.iter().map(|c| c * c).sum::<f64>().sqrt();
            norm.max(1.0)
        })
    }

    /// Builds the runtime instance this section describes.
    pub fn to_instance(&self) -> Result<ProblemInstance> {
        let arm_set = match &self.arm_set {
            ArmSetConfig::Finite { arms } => {
                let built: Result<Vec<Arm>> =
                    arms.iter().map(|a| Arm::new(a.clone())).collect();
                ArmSet::Finite(built?)
            }
            ArmSetConfig::Ball { resolution } => {
                ArmSet::UnitBall { dim: self.theta_star.len(), resolution: *resolution }
            }
            ArmSetConfig::Sphere { resolution } => {
                ArmSet::UnitSphere { dim: self.theta_star.len(), resolution: *resolution }
            }
        };
        ProblemInstance::new(self.theta_star.clone(), self.resolved_s_bound(), arm_set)
    }
}

/// Policies the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyName {
    /// Optimistic planning over the relaxed confidence set.
    OfulogR,
    /// Grid-scan variant of the optimistic planner (low dimensions only).
    OfulogGrid,
    /// UCB on a linear surrogate with a slope-scaled exploration bonus.
    GlmUcb,
    /// Epsilon-greedy over the MLE's greedy choice.
    EpsGreedy,
    /// Always plays the arm that is best under the true parameter.
    BestFixed,
}

/// How the GLM-UCB baseline scales its exploration bonus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KappaChoice {
    Named(KappaName),
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KappaName {
    /// Worst slope over the whole parameter ball.
    Global,
    /// Worst slope over the arm set at the true parameter.
    ArmSet,
    /// Slope at the best arm only.
    Best,
}

fn default_delta() -> f64 {
    0.1
}

fn default_replications() -> u32 {
    1
}

fn default_true() -> bool {
    true
}

/// Knobs for `kind = "run"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub policy: PolicyName,
    pub horizon: u64,
    #[serde(default = "default_replications")]
    pub replications: u32,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Exploration rate for `eps-greedy`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Bonus scaling for `glm-ucb`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<KappaChoice>,
}

/// Knobs for `kind = "coverage"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageSection {
    pub horizon: u64,
    pub replications: u32,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

/// Knobs for `kind = "scaling"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSection {
    pub horizon: u64,
    /// Parameter norms to sweep; the instance's direction is rescaled.
    pub norms: Vec<f64>,
    pub replications: u32,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Also run the slope-scaled linear baseline for comparison.
    #[serde(default = "default_true")]
    pub baseline: bool,
    /// Round indices at which detrimental-set counts are reported
    /// (defaults to the horizon only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checkpoints: Vec<u64>,
}

/// Knobs for `kind = "transitory"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitorySection {
    pub horizon: u64,
    pub replications: u32,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

/// Knobs for `kind = "lowerbound"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerboundSection {
    pub horizon: u64,
    /// Packing perturbation size; omit for the horizon-calibrated choice.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Replications per packing member.
    pub seeds_per_member: u32,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

/// Knobs for `kind = "verify-lemmas"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmasSection {
    /// Cases per scalar suite.
    pub cases: u64,
    /// Sequences per matrix suite.
    pub sequences: u64,
    /// Rounds per matrix sequence.
    pub sequence_horizon: usize,
}

impl Default for LemmasSection {
    fn default() -> Self {
        LemmasSection { cases: 100_000, sequences: 2_000, sequence_horizon: 50 }
    }
}

/// A fully parsed experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub kind: Kind,
    /// Base seed; replication `k` derives its seed as `seed + k`. The CLI's
    /// `--seed` flag overrides this. Defaults to 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Required for every kind except `verify-lemmas`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<CoverageSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transitory: Option<TransitorySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lowerbound: Option<LowerboundSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemmas: Option<LemmasSection>,
}

fn config_err(key: &str, msg: impl Into<String>) -> Error {
    Error::Config { key: key.to_string(), msg: msg.into() }
}

fn check_delta(key: &str, delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(config_err(key, format!("must lie in (0, 1], got {delta}")));
    }
    Ok(())
}

fn check_horizon(key: &str, horizon: u64) -> Result<()> {
    if horizon == 0 {
        return Err(config_err(key, "must be at least 1"));
    }
    Ok(())
}

fn check_replications(key: &str, replications: u32) -> Result<()> {
    if replications == 0 {
        return Err(config_err(key, "must be at least 1"));
    }
    Ok(())
}

impl Config {
    /// Parses and validates a TOML string.
    pub fn from_toml(text: &str) -> Result<Config> {
        let cfg: Config = toml::from_str(text)
            .map_err(|e| config_err("<toml>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file.
    pub fn from_path(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        Config::from_toml(&text)
    }

    /// The instance section, or an error naming the missing key.
    pub fn require_instance(&self) -> Result<&InstanceConfig> {
        self.instance
            .as_ref()
            .ok_or_else(|| config_err("instance", "section is required for this kind"))
    }

    /// Cross-field validation beyond what the parser enforces.
    pub fn validate(&self) -> Result<()> {
        if self.kind != Kind::VerifyLemmas {
            let inst = self.require_instance()?;
            if inst.theta_star.is_empty() {
                return Err(config_err("instance.theta_star", "must be non-empty"));
            }
            if inst.theta_star.iter().any(|c| !c.is_finite()) {
                return Err(config_err("instance.theta_star", "coordinates must be finite"));
            }
            let norm = inst.theta_star.iter().map(|c| c * c).sum::<f64>().sqrt();
            let s = inst.resolved_s_bound();
            if !(s.is_finite() && s > 0.0) {
                return Err(config_err("instance.s_bound", format!("must be positive, got {s}")));
            }
            if norm > s * (1.0 + 1e-9) {
                return Err(config_err(
                    "instance.s_bound",
                    format!("parameter norm {norm} exceeds the ball radius {s}"),
                ));
            }
            match &inst.arm_set {
                ArmSetConfig::Finite { arms } => {
                    if arms.is_empty() {
                        return Err(config_err("instance.arm_set.arms", "must be non-empty"));
                    }
                    for (i, a) in arms.iter().enumerate() {
                        if a.len() != inst.theta_star.len() {
                            return Err(config_err(
                                "instance.arm_set.arms",
                                format!(
                                    "arm {i} has dimension {}, parameter has {}",
                                    a.len(),
                                    inst.theta_star.len()
                                ),
                            ));
                        }
                        let an = a.iter().map(|c| c * c).sum::<f64>().sqrt();
                        if an > 1.0 + 1e-9 {
                            return Err(config_err(
                                "instance.arm_set.arms",
                                format!("arm {i} has norm {an} > 1"),
                            ));
                        }
                    }
                }
                ArmSetConfig::Ball { resolution } | ArmSetConfig::Sphere { resolution } => {
                    if let Some(r) = resolution {
                        if *r < 8 {
                            return Err(config_err(
                                "instance.arm_set.resolution",
                                format!("must be at least 8, got {r}"),
                            ));
                        }
                    }
                }
            }
        }

        let want =
            |present: bool, key: &str| -> Result<()> {
                if !present {
                    return Err(config_err(key, "section is required for this kind"));
                }
                Ok(())
            };

        match self.kind {
            Kind::Run => {
                want(self.run.is_some(), "run")?;
                let r = self.run.as_ref().unwrap();
                check_horizon("run.horizon", r.horizon)?;
                check_replications("run.replications", r.replications)?;
                check_delta("run.delta", r.delta)?;
                if let Some(eps) = r.epsilon {
                    if !(0.0..=1.0).contains(&eps) {
                        return Err(config_err(
                            "run.epsilon",
                            format!("must lie in [0, 1], got {eps}"),
                        ));
                    }
                }
                if r.policy == PolicyName::EpsGreedy && r.epsilon.is_none() {
                    return Err(config_err("run.epsilon", "required for the eps-greedy policy"));
                }
                if let Some(KappaChoice::Fixed(k)) = r.kappa {
                    if !(k.is_finite() && k > 0.0) {
                        return Err(config_err(
                            "run.kappa",
                            format!("must be positive, got {k}"),
                        ));
                    }
                }
            }
            Kind::Coverage => {
                want(self.coverage.is_some(), "coverage")?;
                let c = self.coverage.as_ref().unwrap();
                check_horizon("coverage.horizon", c.horizon)?;
                check_replications("coverage.replications", c.replications)?;
                check_delta("coverage.delta", c.delta)?;
            }
            Kind::Scaling => {
                want(self.scaling.is_some(), "scaling")?;
                let s = self.scaling.as_ref().unwrap();
                check_horizon("scaling.horizon", s.horizon)?;
                check_replications("scaling.replications", s.replications)?;
                check_delta("scaling.delta", s.delta)?;
                if s.norms.is_empty() {
                    return Err(config_err("scaling.norms", "must be non-empty"));
                }
                if s.norms.iter().any(|n| !(n.is_finite() && *n > 0.0)) {
                    return Err(config_err("scaling.norms", "every norm must be positive"));
                }
                for cp in &s.checkpoints {
                    if *cp == 0 || *cp > s.horizon {
                        return Err(config_err(
                            "scaling.checkpoints",
                            format!("checkpoint {cp} outside 1..={}", s.horizon),
                        ));
                    }
                }
            }
            Kind::Transitory => {
                want(self.transitory.is_some(), "transitory")?;
                let t = self.transitory.as_ref().unwrap();
                check_horizon("transitory.horizon", t.horizon)?;
                check_replications("transitory.replications", t.replications)?;
                check_delta("transitory.delta", t.delta)?;
            }
            Kind::Lowerbound => {
                want(self.lowerbound.is_some(), "lowerbound")?;
                let l = self.lowerbound.as_ref().unwrap();
                check_horizon("lowerbound.horizon", l.horizon)?;
                check_replications("lowerbound.seeds_per_member", l.seeds_per_member)?;
                check_delta("lowerbound.delta", l.delta)?;
                let inst = self.require_instance()?;
                let d = inst.theta_star.len();
                if d < 2 {
                    return Err(config_err(
                        "instance.theta_star",
                        "the packing construction needs dimension >= 2",
                    ));
                }
                if let Some(eps) = l.epsilon {
                    let norm = inst.theta_star.iter().map(|c| c * c).sum::<f64>().sqrt();
                    let cap = norm / ((d - 1) as f64).sqrt();
                    if !(eps > 0.0 && eps.is_finite()) {
                        return Err(config_err(
                            "lowerbound.epsilon",
                            format!("must be positive, got {eps}"),
                        ));
                    }
                    if eps > cap {
                        return Err(config_err(
                            "lowerbound.epsilon",
                            format!("perturbation {eps} exceeds the packing cap {cap}"),
                        ));
                    }
                }
            }
            Kind::VerifyLemmas => {
                let l = self.lemmas.clone().unwrap_or_default();
                if l.cases == 0 || l.sequences == 0 || l.sequence_horizon == 0 {
                    return Err(config_err("lemmas", "all budgets must be at least 1"));
                }
            }
        }
        Ok(())
    }

    /// Canonical serialization: stable field order, suitable for digests.
    pub fn canonical_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Mismatch {
            what: format!("config serialization failed: {e}"),
        })
    }

    /// Hex digest of the canonical serialization (32 hex characters).
    pub fn digest(&self) -> Result<String> {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update(self.canonical_json()?.as_bytes());
        Ok(hex::encode(&hasher.finalize()[..16]))
    }
}
