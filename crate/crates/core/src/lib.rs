//! Logistic bandits with self-concordant confidence sets.
//!
//! This crate implements the full loop for Bernoulli bandits whose mean
//! reward is a logistic link of a linear signal: regularized maximum
//! likelihood over the played history, gradient-metric and convex-relaxed
//! confidence sets whose radii do not pay the global flatness constant
//! `kappa`, optimistic planners over those sets, and a Monte Carlo harness
//! with regret and transitory-phase diagnostics.
//!
//! The pieces compose in layers:
//!
//! * [`logistic`] — the link function, its derivatives, and the averaged
//!   slopes used by mean-value arguments;
//! * [`problem`] — arms, arm sets, instances, and the `kappa` constants;
//! * [`estimation`] — histories, the regularized MLE, and the confidence
//!   radii `gamma` / `beta`;
//! * [`confidence`] — membership tests for the exact and relaxed sets;
//! * [`planning`] — optimistic argmax over arms and parameters;
//! * [`sim`] — policies, episodes, experiments, and lower-bound packings;
//! * [`checks`] — fuzzed verification suites for the supporting inequalities;
//! * [`config`] / [`report`] — the experiment harness behind the `logbandit`
//!   binary.

pub mod checks;
pub mod config;
pub mod confidence;
pub mod error;
pub mod estimation;
pub mod linalg;
pub mod logistic;
pub mod planning;
pub mod problem;
pub mod report;
pub mod sim;

pub use error::{Error, Result};
