//! Rate functions for the three deviation regimes.
//!
//! At the transition scale `x_n = C n^(1/(1+eps))` the rate is
//!
//! ```text
//! J(C) = inf_{0 <= t <= 1} f(t),   f(t) = q (1-t)^(1-eps) / C^(1+eps) + t^2 / (2 sigma2)
//! ```
//!
//! where `t` is the share of the deviation carried collectively by the
//! truncated summands and `1 - t` the share of a single large jump. `f` has an
//! interior critical point only above `C'_eps`, and the interior minimum
//! beats the endpoint `t = 1` only above `C_eps`.

mod infconv;
mod legendre;

pub use infconv::{inf_convolution, RateGrid};
pub use legendre::{legendre, LegendreResult};

use serde::{Deserialize, Serialize};

use crate::dist::{check_epsilon, check_positive, WeibullLikeSpec};
use crate::error::{Error, Result};

/// The triple `(eps, q, sigma2)` the rate functions depend on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateParams {
    epsilon: f64,
    q: f64,
    sigma2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalConstants {
    /// Below this `f` has no interior critical point.
    pub c_prime: f64,
    /// Below or at this the rate is the Gaussian one, `1 / (2 sigma2)`.
    pub c_eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    BelowCritical,
    AboveCritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionRate {
    #[serde(rename = "C")]
    pub c: f64,
    pub t_star: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub branch: Branch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Gaussian,
    Transition,
    MaxJump,
}

/// Speed `v_n` at which `log P(S_n >= x_n)` is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Speed {
    /// `x_n^2 / n`
    Quadratic,
    /// `x_n^(1-eps)`
    Tail,
}

impl Speed {
    pub fn description(&self) -> &'static str {
        match self {
            Speed::Quadratic => "x_n^2/n",
            Speed::Tail => "x_n^(1-eps)",
        }
    }

    /// `v_n` for the sequence point `(n, x_n)`.
    pub fn value(&self, n: f64, xn: f64, epsilon: f64) -> f64 {
        match self {
            Speed::Quadratic => xn * xn / n,
            Speed::Tail => xn.powf(1.0 - epsilon),
        }
    }
}

/// A deviation sequence `x_n = c n^alpha` and its theoretical limit of
/// `log P(S_n >= x_n) / v_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeSpec {
    pub alpha: f64,
    pub c: f64,
    pub epsilon: f64,
    pub regime: Regime,
    pub speed: Speed,
    pub limit: f64,
}

impl RegimeSpec {
    pub fn threshold(&self, n: u64) -> f64 {
        self.c * (n as f64).powf(self.alpha)
    }
}

const REGIME_TOL: f64 = 1e-12;

impl RateParams {
    pub fn new(epsilon: f64, q: f64, sigma2: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        check_positive("q", q)?;
        check_positive("sigma2", sigma2)?;
        Ok(Self { epsilon, q, sigma2 })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn gaussian_rate(&self) -> f64 {
        1.0 / (2.0 * self.sigma2)
    }

    /// The objective `f(t)` whose infimum over `[0, 1]` is `J(C)`.
    pub fn objective(&self, c: f64, t: f64) -> f64 {
        self.q * (1.0 - t).powf(1.0 - self.epsilon) / c.powf(1.0 + self.epsilon)
            + t * t / (2.0 * self.sigma2)
    }

    /// `f'(t)` on `[0, 1)`.
    pub fn objective_derivative(&self, c: f64, t: f64) -> f64 {
        let e = self.epsilon;
        -self.q * (1.0 - e) * (1.0 - t).powf(-e) / c.powf(1.0 + e) + t / self.sigma2
    }

    pub fn critical_constants(&self) -> CriticalConstants {
        let (e, q, s2) = (self.epsilon, self.q, self.sigma2);
        let c_prime = (1.0 + e) * ((1.0 - e) * q * s2 * e.powf(-e)).powf(1.0 / (1.0 + e));
        let c_eps = (1.0 + e) * (q * s2 * (2.0 * e).powf(-e)).powf(1.0 / (1.0 + e));
        CriticalConstants { c_prime, c_eps }
    }

    /// Smallest root in `[0, 1]` of `t (1-t)^eps = (1-eps) q sigma2 / C^(1+eps)`.
    ///
    /// Bisection on `[0, 1/(1+eps)]`, where the left side increases strictly
    /// from 0 to its maximum.
    pub fn solve_t(&self, c: f64) -> Result<f64> {
        check_positive("C", c)?;
        let e = self.epsilon;
        let rhs = (1.0 - e) * self.q * self.sigma2 / c.powf(1.0 + e);
        let g = |t: f64| t * (1.0 - t).powf(e) - rhs;
        let mut hi = 1.0 / (1.0 + e);
        let consts = self.critical_constants();
        if c <= consts.c_prime || g(hi) < 0.0 {
            return Err(Error::domain(format!(
                "C = {c} must exceed C'_eps = {} for an interior minimum to exist",
                consts.c_prime
            )));
        }
        let mut lo = 0.0f64;
        while hi - lo > 1e-15 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// `J(C)` with the branch that realizes it; `C = C_eps` counts as below.
    pub fn rate_transition(&self, c: f64) -> Result<TransitionRate> {
        check_positive("C", c)?;
        let consts = self.critical_constants();
        if c <= consts.c_eps {
            return Ok(TransitionRate {
                c,
                t_star: 1.0,
                j: self.gaussian_rate(),
                branch: Branch::BelowCritical,
            });
        }
        let t_star = self.solve_t(c)?;
        Ok(TransitionRate {
            c,
            t_star,
            j: self.objective(c, t_star),
            branch: Branch::AboveCritical,
        })
    }

    /// Regime, speed and limit for `x_n = c n^alpha`.
    pub fn classify_regime(&self, alpha: f64, c: f64) -> Result<RegimeSpec> {
        if !(alpha.is_finite() && alpha > 0.5) {
            return Err(Error::domain(format!(
                "alpha must exceed 1/2 (x_n >> n^(1/2)), got {alpha}; the central-limit range is out of scope"
            )));
        }
        check_positive("c", c)?;
        let critical = 1.0 / (1.0 + self.epsilon);
        let (regime, speed, limit) = if (alpha - critical).abs() <= REGIME_TOL * critical {
            (Regime::Transition, Speed::Quadratic, -self.rate_transition(c)?.j)
        } else if alpha < critical {
            (Regime::Gaussian, Speed::Quadratic, -self.gaussian_rate())
        } else {
            (Regime::MaxJump, Speed::Tail, -self.q)
        };
        Ok(RegimeSpec {
            alpha,
            c,
            epsilon: self.epsilon,
            regime,
            speed,
            limit,
        })
    }

    /// The transition-scale sequence `x_n = C n^(1/(1+eps))`.
    pub fn transition_regime(&self, c: f64) -> Result<RegimeSpec> {
        self.classify_regime(1.0 / (1.0 + self.epsilon), c)
    }

    /// `C` such that `x = C n^(1/(1+eps))`.
    pub fn transition_constant(&self, n: u64, x: f64) -> f64 {
        x / (n as f64).powf(1.0 / (1.0 + self.epsilon))
    }
}

impl From<&WeibullLikeSpec> for RateParams {
    fn from(law: &WeibullLikeSpec) -> Self {
        Self {
            epsilon: law.epsilon(),
            q: law.q(),
            sigma2: law.sigma2(),
        }
    }
}
