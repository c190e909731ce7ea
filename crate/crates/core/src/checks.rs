//! Randomized verification suites for the analytic inequalities the library
//! leans on.
//!
//! Every suite hammers one inequality over a mix of random draws and
//! deliberately nasty regions (deep tails, near-zero gaps, tight corners) and
//! reports the case count, the number of violations beyond a relative slack
//! of `1e-8`, and the worst observed margin `rhs - lhs`. The CLI surfaces
//! them behind a subcommand; the integration suite runs them at full budget.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::estimation::RegSchedule;
use crate::logistic::{
    chord_slope, log1p_exp, logistic_deriv, logistic_second, remainder_slope,
};

/// Relative slack granted to every inequality check.
const CHECK_SLACK: f64 = 1e-8;

/// Outcome of one verification suite.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: u64,
    pub violations: u64,
    /// Smallest `rhs - lhs` seen across all cases (negative means some case
    /// came out the wrong way, violation or not).
    pub worst_margin: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

struct Recorder {
    name: &'static str,
    cases: u64,
    violations: u64,
    worst_margin: f64,
}

impl Recorder {
    fn new(name: &'static str) -> Self {
        Recorder { name, cases: 0, violations: 0, worst_margin: f64::INFINITY }
    }

    /// Records one instance of `lhs <= rhs`.
    fn check(&mut self, lhs: f64, rhs: f64) {
        self.cases += 1;
        let margin = rhs - lhs;
        if margin < self.worst_margin {
            self.worst_margin = margin;
        }
        if lhs > rhs + CHECK_SLACK * (1.0 + rhs.abs()) {
            self.violations += 1;
        }
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            name: self.name,
            cases: self.cases,
            violations: self.violations,
            worst_margin: self.worst_margin,
        }
    }
}

/// Samples a logit from a mix of moderate, wide, and deep-tail ranges.
fn sample_logit(rng: &mut ChaCha8Rng) -> f64 {
    match rng.gen_range(0u8..4) {
        0 => rng.gen_range(-3.0..3.0),
        1 => rng.gen_range(-12.0..12.0),
        2 => rng.gen_range(-45.0..45.0),
        _ => rng.gen_range(-700.0..700.0),
    }
}

/// Samples a gap from a mix spanning ten orders of magnitude.
fn sample_gap(rng: &mut ChaCha8Rng) -> f64 {
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let mag = match rng.gen_range(0u8..3) {
        0 => rng.gen_range(1e-10..1e-3f64),
        1 => rng.gen_range(1e-3..1.0f64),
        _ => rng.gen_range(1.0..20.0f64),
    };
    sign * mag
}

/// Chord slopes dominate the endpoint derivative discounted by the gap:
/// `chord_slope(z1, z2) >= deriv(z_i) / (1 + |z1 - z2|)` for both endpoints.
pub fn chord_lower_bound_suite(seed: u64, cases: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder::new("chord_slope_lower_bound");
    while rec.cases < cases {
        let z1 = sample_logit(&mut rng);
        let z2 = z1 + sample_gap(&mut rng);
        let alpha = chord_slope(z1, z2);
        let gap = (z2 - z1).abs();
        rec.check(logistic_deriv(z1) / (1.0 + gap), alpha);
        rec.check(logistic_deriv(z2) / (1.0 + gap), alpha);
    }
    rec.finish()
}

/// Taylor-remainder slopes dominate the base-point derivative discounted by
/// the gap: `remainder_slope(a, b) >= deriv(a) / (2 + |b|)`.
pub fn remainder_lower_bound_suite(seed: u64, cases: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder::new("remainder_slope_lower_bound");
    while rec.cases < cases {
        let a = sample_logit(&mut rng);
        let b = sample_gap(&mut rng);
        rec.check(logistic_deriv(a) / (2.0 + b.abs()), remainder_slope(a, b));
    }
    rec.finish()
}

/// Derivative ratios grow at most exponentially in the logit gap:
/// `deriv(z1) / deriv(z2) <= exp(|z1 - z2|)`, checked in log space so deep
/// tails do not underflow.
pub fn deriv_ratio_suite(seed: u64, cases: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder::new("deriv_ratio_exponential");
    // log deriv(z) = -(softplus(z) + softplus(-z)), exact for all z.
    let log_deriv = |z: f64| -(log1p_exp(z) + log1p_exp(-z));
    while rec.cases < cases {
        let z1 = sample_logit(&mut rng);
        let z2 = z1 + sample_gap(&mut rng);
        rec.check(log_deriv(z1) - log_deriv(z2), (z1 - z2).abs());
    }
    rec.finish()
}

/// The sigmoid is self-concordant: `|second(z)| <= deriv(z)`.
pub fn self_concordance_suite(seed: u64, cases: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder::new("self_concordance");
    while rec.cases < cases {
        let z = sample_logit(&mut rng);
        rec.check(logistic_second(z).abs(), logistic_deriv(z));
    }
    rec.finish()
}

/// The scalar rational bound `(1/x)(1 + (e^{-x} - 1)/x) >= 1/(2 + x)` for
/// `x > 0`, swept over a deterministic log grid.
pub fn scalar_rational_suite(cases: u64) -> SuiteReport {
    let mut rec = Recorder::new("scalar_rational_bound");
    let (lo, hi) = (1e-8f64, 1e3f64);
    let steps = cases.max(2);
    for k in 0..steps {
        let frac = k as f64 / (steps - 1) as f64;
        let x = lo * (hi / lo).powf(frac);
        // exp_m1 keeps the numerator accurate for tiny x.
        let lhs = (1.0 + (-x).exp_m1() / x) / x;
        rec.check(1.0 / (2.0 + x), lhs);
    }
    rec.finish()
}

/// Largest root of `x^2 <= b x + c` obeys `x <= b + sqrt(c)` for
/// non-negative coefficients.
pub fn quadratic_root_suite(seed: u64, cases: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder::new("quadratic_root_bound");
    while rec.cases < cases {
        let b: f64 = match rng.gen_range(0u8..3) {
            0 => rng.gen_range(0.0..1e-4),
            1 => rng.gen_range(0.0..10.0),
            _ => rng.gen_range(0.0..1e6),
        };
        let c: f64 = match rng.gen_range(0u8..3) {
            0 => rng.gen_range(0.0..1e-4),
            1 => rng.gen_range(0.0..10.0),
            _ => rng.gen_range(0.0..1e6),
        };
        let x = 0.5 * (b + (b * b + 4.0 * c).sqrt());
        rec.check(x, b + c.sqrt());
    }
    rec.finish()
}

fn random_arm_sequence(rng: &mut ChaCha8Rng, d: usize, t: usize, x_max: f64) -> Vec<DVector<f64>> {
    (0..t)
        .map(|_| {
            let mut v = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0f64));
            let n = v.norm();
            if n > 1e-12 {
                v *= x_max * rng.gen_range(0.0..1.0f64).sqrt() / n;
            }
            v
        })
        .collect()
}

/// Determinant-trace bound on regularized design matrices: with
/// `V = sum_{s<=t} x_s x_s' + lambda_{t+1} I` and arm norms at most `X`,
/// `det V <= (lambda_{t+1} + t X^2 / d)^d` at every prefix.
pub fn det_trace_suite(seed: u64, sequences: u64, horizon: usize) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder::new("det_trace_bound");
    for _ in 0..sequences {
        let d = rng.gen_range(1..4);
        let x_max = rng.gen_range(0.2..1.0f64);
        let sched = RegSchedule::new(d);
        let arms = random_arm_sequence(&mut rng, d, horizon, x_max);
        let mut base = DMatrix::<f64>::zeros(d, d);
        for (t, x) in arms.iter().enumerate() {
            base.syger(1.0, x, x, 1.0);
            let lambda = sched.lambda_at(t as u64 + 2).expect("schedule domain");
            let v = &base + DMatrix::identity(d, d) * lambda;
            let det = v.determinant();
            let bound = (lambda + (t + 1) as f64 * x_max * x_max / d as f64).powi(d as i32);
            rec.check(det, bound);
        }
    }
    rec.finish()
}

/// Elliptical potential bound: with `V_t = sum_{s<t} x_s x_s' + lambda_t I`
/// and arm norms at most `X <= 1`, every prefix satisfies
/// `sum_{t<=T} |x_t|^2_{V_t^{-1}} <= 2 d (1 + X^2) ln(lambda_T + T X^2 / d)`.
pub fn elliptical_potential_suite(seed: u64, sequences: u64, horizon: usize) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder::new("elliptical_potential");
    for s in 0..sequences {
        let d = rng.gen_range(1..4);
        let x_max = rng.gen_range(0.2..1.0f64);
        // Alternate between the scheduled regularizer and a flat unit one.
        let flat = s % 2 == 0;
        let sched = RegSchedule::new(d);
        let arms = random_arm_sequence(&mut rng, d, horizon, x_max);
        let mut base = DMatrix::<f64>::zeros(d, d);
        let mut lhs = 0.0;
        for (idx, x) in arms.iter().enumerate() {
            let t = idx as u64 + 1;
            let lambda =
                if flat { 1.0 } else { sched.lambda_at(t).expect("schedule domain") };
            let v = &base + DMatrix::identity(d, d) * lambda;
            let chol = v.cholesky().expect("regularized design is positive definite");
            lhs += chol.solve(x).dot(x);
            let rhs = 2.0
                * d as f64
                * (1.0 + x_max * x_max)
                * (lambda + t as f64 * x_max * x_max / d as f64).ln();
            rec.check(lhs, rhs);
            base.syger(1.0, x, x, 1.0);
        }
    }
    rec.finish()
}

/// Budget knobs for [`run_all`].
#[derive(Debug, Clone, Copy)]
pub struct SuiteBudget {
    pub scalar_cases: u64,
    pub matrix_sequences: u64,
    pub matrix_horizon: usize,
}

impl Default for SuiteBudget {
    fn default() -> Self {
        // Each suite sees at least 1e5 cases at the default budget.
        SuiteBudget { scalar_cases: 100_000, matrix_sequences: 2_000, matrix_horizon: 50 }
    }
}

/// Runs every suite and returns their reports.
pub fn run_all(seed: u64, budget: &SuiteBudget) -> Vec<SuiteReport> {
    vec![
        chord_lower_bound_suite(seed, budget.scalar_cases),
        remainder_lower_bound_suite(seed ^ 0x9E37_79B9, budget.scalar_cases),
        deriv_ratio_suite(seed ^ 0x85EB_CA6B, budget.scalar_cases),
        self_concordance_suite(seed ^ 0xC2B2_AE35, budget.scalar_cases),
        scalar_rational_suite(budget.scalar_cases),
        quadratic_root_suite(seed ^ 0x27D4_EB2F, budget.scalar_cases),
        det_trace_suite(seed ^ 0x1656_67B1, budget.matrix_sequences, budget.matrix_horizon),
        elliptical_potential_suite(
            seed ^ 0xFF51_AFD7,
            budget.matrix_sequences,
            budget.matrix_horizon,
        ),
    ]
}
