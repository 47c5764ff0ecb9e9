use serde::Serialize;

use crate::dist::WeibullLikeSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxJumpExact {
    /// `P(max_i Y_i >= x) = 1 - (1 - s)^n`.
    pub p_max: f64,
    /// `n s`.
    pub n_tail: f64,
    pub log_p_max: f64,
    /// `log s = log P(Y >= x)`.
    pub log_s: f64,
}

/// Exact law of the largest of `n` centered summands at level `x`.
pub fn max_jump_exact(law: &WeibullLikeSpec, n: u64, x: f64) -> Result<MaxJumpExact> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    if x.is_nan() {
        return Err(Error::domain("x must be a number"));
    }
    Ok(max_jump_from_log_tail(n, law.log_survival_centered(x)))
}

/// Same as [`max_jump_exact`] from a given `log s`.
pub fn max_jump_from_log_tail(n: u64, log_s: f64) -> MaxJumpExact {
    let nf = n as f64;
    let s = log_s.exp();
    let log_n_tail = nf.ln() + log_s;
    let log_p_max = if s == 0.0 {
        // s underflowed: p_max = n s (1 + O(n s)) to full precision.
        log_n_tail
    } else if s == 1.0 {
        0.0
    } else {
        // log(1 - exp(n log1p(-s)))
        let a = nf * (-s).ln_1p();
        if a > -std::f64::consts::LN_2 {
            (-a.exp_m1()).ln()
        } else {
            (-a.exp()).ln_1p()
        }
    };
    MaxJumpExact {
        p_max: log_p_max.exp(),
        n_tail: log_n_tail.exp(),
        log_p_max,
        log_s,
    }
}

/// The largest log term with its label. Ties keep the first.
pub fn largest_term_combine<L: Clone>(terms: &[(L, f64)]) -> Result<(L, f64)> {
    let mut best: Option<&(L, f64)> = None;
    for t in terms {
        if t.1.is_nan() {
            return Err(Error::domain("log term is NaN"));
        }
        if best.is_none_or(|b| t.1 > b.1) {
            best = Some(t);
        }
    }
    best.cloned().ok_or_else(|| Error::domain("no terms to combine"))
}
