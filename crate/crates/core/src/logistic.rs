//! The logistic link and its averaged slopes.
//!
//! Everything downstream (losses, Hessians, confidence radii) is built from
//! the sigmoid `mu(z) = 1 / (1 + exp(-z))` and its first two derivatives.
//! The implementations here are the only place the link is evaluated, and they
//! are written to survive the whole double range without overflow:
//!
//! * `mu` splits on the sign of `z` so `exp` is only taken of non-positive
//!   arguments;
//! * `mu'` is computed as `mu(z) * mu(-z)`, which keeps full relative accuracy
//!   in both tails (the naive `mu * (1 - mu)` collapses to zero for `z > 36`);
//! * the averaged slopes below use `expm1`/`log1p` forms chosen per branch so
//!   that no catastrophic cancellation occurs for small gaps.
//!
//! Two averaged slopes show up in the confidence-set machinery:
//!
//! * [`chord_slope`], the mean of `mu'` over the segment between two logits —
//!   equal to the chord slope `(mu(z2) - mu(z1)) / (z2 - z1)`;
//! * [`remainder_slope`], the `(1 - v)`-weighted mean of `mu'`, i.e. the
//!   kernel of the second-order Taylor remainder of the log-partition
//!   function.

use crate::error::{Error, Result};

/// Sigmoid `mu(z)`, overflow-free for any finite `z`.
#[inline]
pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// First derivative `mu'(z) = mu(z) * (1 - mu(z))`, computed as
/// `e / (1 + e)^2` with `e = exp(-|z|)` so both tails keep full relative
/// accuracy from a single exponential.
#[inline]
pub fn logistic_deriv(z: f64) -> f64 {
    let e = (-z.abs()).exp();
    let b = 1.0 + e;
    e / (b * b)
}

/// Second derivative `mu''(z) = mu'(z) * (1 - 2 mu(z))`.
#[inline]
pub fn logistic_second(z: f64) -> f64 {
    logistic_deriv(z) * (1.0 - 2.0 * logistic(z))
}

/// Third derivative, used only by the small-gap series in
/// [`remainder_slope`].
#[inline]
fn logistic_third(z: f64) -> f64 {
    let d = logistic_deriv(z);
    let c = 1.0 - 2.0 * logistic(z);
    d * c * c - 2.0 * d * d
}

/// Softplus `log(1 + exp(z))`, the antiderivative of the sigmoid, without
/// overflow for large positive `z`.
#[inline]
pub fn log1p_exp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Sigmoid value together with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticTriple {
    pub value: f64,
    pub deriv: f64,
    pub second: f64,
}

/// Evaluates `mu`, `mu'`, `mu''` at `z`, rejecting non-finite input.
///
/// The triple satisfies generalized self-concordance `|mu''| <= mu'`, which is
/// what lets the confidence sets avoid a global `kappa` factor.
pub fn logistic_family(z: f64) -> Result<LogisticTriple> {
    if !z.is_finite() {
        return Err(Error::NonFinite { what: "logit z" });
    }
    Ok(LogisticTriple {
        value: logistic(z),
        deriv: logistic_deriv(z),
        second: logistic_second(z),
    })
}

/// Gap below which [`chord_slope`] substitutes `mu'(z1)` for the chord.
pub const CHORD_GAP_FLOOR: f64 = 1e-8;

/// Gap below which [`remainder_slope`] switches to its Taylor series.
pub const REMAINDER_GAP_FLOOR: f64 = 1e-4;

// Above this gap the direct difference of softplus/sigmoid values is already
// cancellation-free, and the expm1 product forms would overflow.
const LARGE_GAP: f64 = 30.0;

/// Average of `mu'` over the segment from `z1` to `z2`:
/// the integral of `mu'(z1 + v (z2 - z1))` over `v` in `[0, 1]`.
///
/// By the fundamental theorem this equals the chord slope
/// `(mu(z2) - mu(z1)) / (z2 - z1)`; for gaps below [`CHORD_GAP_FLOOR`] the
/// limit `mu'(z1)` is returned instead. Always in `(0, 1/4]`.
pub fn chord_slope(z1: f64, z2: f64) -> f64 {
    let b = z2 - z1;
    if b.abs() <= CHORD_GAP_FLOOR {
        return logistic_deriv(z1);
    }
    let raw = if b.abs() <= LARGE_GAP {
        // mu(z2) - mu(z1) = mu(z1) * (1 - mu(z2)) * expm1(z2 - z1), an
        // all-product form with no subtractive cancellation at small gaps.
        logistic(z1) * logistic(-z2) * b.exp_m1() / b
    } else {
        (logistic(z2) - logistic(z1)) / b
    };
    // Keep positivity structural in the deep tails, where the difference can
    // round to zero: the average slope provably dominates
    // mu'(z) / (1 + |gap|) at either endpoint.
    let floor = logistic_deriv(z1).max(logistic_deriv(z2)) / (1.0 + b.abs());
    raw.max(floor).min(0.25)
}

/// `(1 - v)`-weighted average of `mu'` along the segment starting at logit
/// `a` with increment `b`: the integral of `(1 - v) mu'(a + v b)` over
/// `v` in `[0, 1]`. Always in `(0, 1/8]`.
///
/// This is the curvature the convex-relaxed confidence set sees: the
/// log-partition function `log(1 + exp(z))` expanded to second order around
/// `a` has exactly `remainder_slope(a, b) * b^2` as its remainder.
pub fn remainder_slope(a: f64, b: f64) -> f64 {
    if b.abs() <= REMAINDER_GAP_FLOOR {
        // Series around b = 0; the cubic term at this gap is below 1e-14.
        return 0.5 * logistic_deriv(a)
            + b * logistic_second(a) / 6.0
            + b * b * logistic_third(a) / 24.0;
    }
    let num = if b.abs() <= 1.0 {
        // softplus(a + b) - softplus(a) - b mu(a)
        //   = [log1p(u) - u] + mu(a) [expm1(b) - b],   u = mu(a) expm1(b),
        // with each bracket evaluated free of subtractive cancellation.
        // Only needed (and only well-conditioned: |u| < 0.64 keeps log1p
        // tame) while the gap is small.
        let u = logistic(a) * b.exp_m1();
        let log_rem = if u.abs() <= 1e-4 {
            u * u * (-0.5 + u * (1.0 / 3.0 - 0.25 * u))
        } else {
            u.ln_1p() - u
        };
        log_rem + logistic(a) * (b.exp_m1() - b)
    } else {
        // Large gap: b^2 dwarfs the rounding of the direct difference.
        log1p_exp(a + b) - log1p_exp(a) - b * logistic(a)
    };
    // As with the chord slope, the deep tails can lose the (tiny, positive)
    // signal to rounding; the provable endpoint bound keeps the sign.
    let floor = logistic_deriv(a) / (2.0 + b.abs());
    (num / (b * b)).max(floor).min(0.125)
}
