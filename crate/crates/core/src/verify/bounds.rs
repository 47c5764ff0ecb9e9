//! Analytic upper bounds on the truncated blocks of a sum.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{log_binomial, log_sum_exp};

pub const DEFAULT_DELTA: f64 = 0.15;
pub const DEFAULT_APPLICABLE_FROM_N: u64 = 1000;

/// Slack `delta` and the caller-declared `n` from which the bounds are
/// expected to hold. The bounds only hold eventually and no explicit
/// threshold is available, so below `applicable_from_n` a comparison is
/// heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundParams {
    delta: f64,
    applicable_from_n: u64,
}

impl Default for BoundParams {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            applicable_from_n: DEFAULT_APPLICABLE_FROM_N,
        }
    }
}

impl BoundParams {
    pub fn new(delta: f64, applicable_from_n: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::domain(format!("delta must lie in [0,1), got {delta}")));
        }
        if applicable_from_n == 0 {
            return Err(Error::domain("applicable_from_n must be positive"));
        }
        Ok(Self { delta, applicable_from_n })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn applicable_from_n(&self) -> u64 {
        self.applicable_from_n
    }
    pub fn applies(&self, n: u64) -> bool {
        n >= self.applicable_from_n
    }
}

/// `-(1-delta) u^2 / (2 n sigma2)`: bound on `log P(S_m >= u, all X_i < x_n^eps)`.
pub fn bound_small(params: &BoundParams, n: u64, u: f64, sigma2: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(Error::domain(format!("u must be nonnegative, got {u}")));
    }
    if n == 0 {
        return Err(Error::domain("n must be positive"));
    }
    Ok(-(1.0 - params.delta) * u * u / (2.0 * n as f64 * sigma2))
}

/// `-(1-delta) q (u^(1-eps) + m (1 - 2^-eps) x_n^(eps (1-eps)))`: bound on
/// `log P(S_m >= u, all X_i >= x_n^eps)` for `m >= 2`, `0 <= u <= x_n`.
pub fn bound_medium(params: &BoundParams, q: f64, epsilon: f64, m: u64, u: f64, xn: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::domain(format!("the large-jump bound needs m >= 2, got {m}")));
    }
    if !(u >= 0.0 && u <= xn) {
        return Err(Error::domain(format!("u must lie in [0, x_n] = [0, {xn}], got {u}")));
    }
    Ok(medium_unchecked(params.delta, q, epsilon, m, u, xn))
}

fn medium_unchecked(delta: f64, q: f64, epsilon: f64, m: u64, u: f64, xn: f64) -> f64 {
    let k = 1.0 - epsilon;
    -(1.0 - delta) * q * (u.powf(k) + m as f64 * (1.0 - 2f64.powf(-epsilon)) * xn.powf(epsilon * k))
}

const SPLITS: usize = 64;

/// Analytic ceiling on `log(binom(n, m) Pi_{n,m}(x))` for `m >= 2`.
///
/// The deviation is covered by the strips "truncated part carries at least
/// `(k-1)/r` of `x`, large jumps the remaining `1 - k/r`", `k = 1..r`, and
/// each strip is bounded by the product of the two block bounds.
pub fn term_log_ceiling(delta: f64, q: f64, epsilon: f64, sigma2: f64, n: u64, m: u64, x: f64) -> f64 {
    debug_assert!(m >= 2 && m <= n);
    let r = SPLITS as f64;
    let best = (1..=SPLITS)
        .map(|k| {
            let t = (k - 1) as f64 / r;
            let small = -(1.0 - delta) * (t * x).powi(2) / (2.0 * n as f64 * sigma2);
            small + medium_unchecked(delta, q, epsilon, m, (1.0 - k as f64 / r) * x, x)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    log_binomial(n, m) + r.ln() + best
}

/// Ceiling on `log sum_{m > m_max} binom(n, m) Pi_{n,m}(x)`; `-inf` if empty.
pub fn remainder_log_ceiling(delta: f64, q: f64, epsilon: f64, sigma2: f64, n: u64, m_max: u64, x: f64) -> f64 {
    let first = m_max.max(1) + 1;
    if first > n {
        return f64::NEG_INFINITY;
    }
    let terms: Vec<f64> = (first..=n)
        .map(|m| term_log_ceiling(delta, q, epsilon, sigma2, n, m, x))
        .collect();
    log_sum_exp(&terms)
}
