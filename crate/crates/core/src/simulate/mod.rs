//! Monte Carlo estimation of `P(S_n >= x)` for sums of centered Weibull-like
//! variables.
//!
//! Besides a naive estimator, the probability is split by which summands
//! exceed a cutoff `c` (by default `x^eps`):
//!
//! ```text
//! P(S_n >= x) = sum_m binom(n, m) Pi_{n,m}(x)
//! Pi_{n,m}(x) = P(S_n >= x, X_1..X_m >= c, X_{m+1}..X_n < c)
//! ```
//!
//! Each `Pi_{n,m}` is estimated with the `n - m` truncated summands drawn
//! from an exponentially tilted table and the `m` large summands drawn from
//! the exact conditional law above `c`; the last large summand is integrated
//! out analytically through the exact tail.
//!
//! Work is split into a fixed number of chunks, each with its own ChaCha
//! stream derived from `(seed, stream tag, chunk index)`. Results merge in
//! chunk order, so they do not depend on the number of worker threads.

mod estimators;
mod exact;

pub use estimators::{
    estimate_block, estimate_decomposition, estimate_naive, estimate_naive_truncated, estimate_pi, BlockEvent,
    DecompositionEstimate, MMax, TermEstimate,
};
pub(crate) use estimators::naive_sum_at_least;
pub use exact::{largest_term_combine, max_jump_exact, max_jump_from_log_tail, MaxJumpExact};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dist::WeibullLikeSpec;
use crate::error::{Error, Result};

pub const DEFAULT_CHUNKS: u32 = 64;
pub const DEFAULT_GRID_POINTS: usize = 2048;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Naive,
    Decomposition,
    PiTerm,
    ImportanceSampling,
    ExactMax,
}

/// One Monte Carlo estimate of a log-probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRecord {
    pub method: Method,
    pub n: u64,
    pub x: f64,
    /// Natural log of the estimate; `-inf` when nothing was observed.
    pub log_p_hat: f64,
    /// Delta-method standard error of `log_p_hat`. Zero when `zero_hits`.
    pub std_err_log: f64,
    pub num_samples: u64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    pub zero_hits: bool,
    /// One-sided 97.5% Clopper–Pearson upper bound on `log p`, set on zero hits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_p_upper: Option<f64>,
}

impl EstimateRecord {
    /// 95% interval on the log scale.
    pub fn interval95(&self) -> (f64, f64) {
        if self.zero_hits {
            return (f64::NEG_INFINITY, self.log_p_upper.unwrap_or(0.0));
        }
        let half = Z95 * self.std_err_log;
        (self.log_p_hat - half, self.log_p_hat + half)
    }

    pub fn overlaps95(&self, other: &EstimateRecord) -> bool {
        let (a0, a1) = self.interval95();
        let (b0, b1) = other.interval95();
        a0 <= b1 && b0 <= a1
    }
}

/// Inputs shared by the estimators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub law: WeibullLikeSpec,
    pub n: u64,
    /// Threshold on the centered sum.
    pub x: f64,
    /// Truncation point on the centered scale.
    pub cutoff: f64,
    pub num_samples: u64,
    pub seed: u64,
    pub chunk_count: u32,
    /// Tilt override; `None` selects the default per term.
    pub tilt: Option<f64>,
    pub grid_points: usize,
}

impl SimulationConfig {
    /// Config with cutoff `x^eps`, default chunking and default tilt.
    pub fn new(law: WeibullLikeSpec, n: u64, x: f64, num_samples: u64, seed: u64) -> Result<Self> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::domain(format!("threshold x must be positive, got {x}")));
        }
        let cfg = Self {
            law,
            n,
            x,
            cutoff: x.powf(law.epsilon()),
            num_samples,
            seed,
            chunk_count: DEFAULT_CHUNKS,
            tilt: None,
            grid_points: DEFAULT_GRID_POINTS,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Result<Self> {
        self.cutoff = cutoff;
        self.validate()?;
        Ok(self)
    }

    pub fn with_tilt(mut self, tilt: Option<f64>) -> Result<Self> {
        self.tilt = tilt;
        self.validate()?;
        Ok(self)
    }

    pub fn with_chunks(mut self, chunk_count: u32) -> Result<Self> {
        self.chunk_count = chunk_count;
        self.validate()?;
        Ok(self)
    }

    pub fn with_samples(mut self, num_samples: u64) -> Result<Self> {
        self.num_samples = num_samples;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::domain("n must be at least 1"));
        }
        if self.num_samples == 0 {
            return Err(Error::domain("num_samples must be positive"));
        }
        if self.chunk_count == 0 {
            return Err(Error::domain("chunk_count must be positive"));
        }
        if !(self.cutoff > -self.law.mu() && self.cutoff <= self.x) {
            return Err(Error::domain(format!(
                "cutoff must lie in (-mu, x] = ({}, {}], got {}",
                -self.law.mu(),
                self.x,
                self.cutoff
            )));
        }
        if let Some(t) = self.tilt {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::domain(format!("tilt must be nonnegative, got {t}")));
            }
        }
        Ok(())
    }

    /// Default tilt for the truncated block of `Pi_{n,m}`.
    ///
    /// For `m = 0` the block must reach `x` alone, and the tilt puts its
    /// tilted mean at `x / n` (the Chernoff point, capped just below the
    /// cutoff). For `1 <= m < n` the tilt maximizes
    ///
    /// ```text
    /// -I(lambda) + log P(Y >= max(c, x - a(lambda) - (m-1) E[Y | Y >= c]))
    /// ```
    ///
    /// where `a(lambda)` is the tilted mean of the `n - m` truncated summands
    /// and `I` is the exact truncated Chernoff cost of reaching it: the block
    /// carries part of `x`, the `m - 1` sampled jumps their mean, and the
    /// integrated last jump the rest. On the transition scale this recovers
    /// the optimal split `t*` of `J(C)`. For `m = n` there is nothing to tilt.
    pub fn default_tilt(&self, m: u64) -> Result<f64> {
        if m >= self.n {
            return Ok(0.0);
        }
        let law = &self.law;
        let c = self.cutoff;
        let k = (self.n - m) as f64;
        let base = law.truncated_tilted_mean(c, 0.0)?;
        let cap = base + TILT_TARGET_CAP * (c - base);
        if m == 0 {
            return law.solve_truncated_tilt(c, (self.x / k).min(cap));
        }
        let lambda_max = law.solve_truncated_tilt(c, cap)?;
        if lambda_max == 0.0 {
            return Ok(0.0);
        }
        let log_z0 = law.truncated_log_mgf(c, 0.0)?;
        let carried = (m - 1) as f64 * law.conditional_mean_above(c)?;
        let objective = |lambda: f64| -> Result<f64> {
            let mean = law.truncated_tilted_mean(c, lambda)?;
            let cost = k * (lambda * mean - (law.truncated_log_mgf(c, lambda)? - log_z0));
            let rest = (self.x - k * mean - carried).max(c);
            Ok(-cost + law.log_survival_centered(rest))
        };
        // Quadratic spacing resolves small tilts, where most optima sit.
        const GRID: usize = 48;
        let node = |j: f64| lambda_max * (j / GRID as f64).powi(2);
        let mut best = (0usize, f64::NEG_INFINITY);
        for j in 0..=GRID {
            let v = objective(node(j as f64))?;
            if v > best.1 {
                best = (j, v);
            }
        }
        let lo = node((best.0 as f64 - 1.0).max(0.0));
        let hi = node((best.0 as f64 + 1.0).min(GRID as f64));
        golden_max(objective, lo, hi)
    }

    pub fn tilt_for(&self, m: u64) -> Result<f64> {
        match self.tilt {
            Some(t) => Ok(t),
            None => self.default_tilt(m),
        }
    }
}

/// Largest truncated tilted mean targeted by default, as a fraction of the
/// way from the untilted truncated mean to the cutoff.
const TILT_TARGET_CAP: f64 = 0.98;

fn golden_max<F: Fn(f64) -> Result<f64>>(f: F, mut a: f64, mut b: f64) -> Result<f64> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while b - a > 1e-9 * b.max(1e-12) {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Law to draw from in [`draw_samples`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleKind {
    /// Raw scale.
    Raw,
    /// Raw scale, conditioned on `X_raw >= a`.
    Conditional { a: f64 },
    /// Centered scale, tilted and truncated below `cutoff`.
    Tilted { cutoff: f64, lambda: f64, grid_points: usize },
}

const STREAM_DRAW: u64 = 5;

/// `count` seeded draws on a single stream.
pub fn draw_samples(law: &WeibullLikeSpec, kind: SampleKind, count: usize, seed: u64) -> Result<Vec<f64>> {
    use rand::Rng;
    let mut rng = chunk_rng(seed, STREAM_DRAW, 0);
    let mut level = move || 1.0 - rng.random::<f64>();
    match kind {
        SampleKind::Raw => (0..count).map(|_| law.sample_raw(level())).collect(),
        SampleKind::Conditional { a } => (0..count).map(|_| law.sample_conditional(a, level())).collect(),
        SampleKind::Tilted {
            cutoff,
            lambda,
            grid_points,
        } => {
            let table = law.build_tilted_table(cutoff, lambda, grid_points)?;
            Ok((0..count).map(|_| table.sample_tilted(level())).collect())
        }
    }
}

/// Stable 64-bit mixer (SplitMix64 finalizer).
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for one chunk of one estimator stream.
pub(crate) fn chunk_rng(seed: u64, stream: u64, chunk: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix64(seed ^ mix64(stream ^ mix64(chunk))))
}

/// Splits `total` into `chunks` near-equal parts; earlier chunks take the remainder.
pub(crate) fn chunk_sizes(total: u64, chunks: u32) -> Vec<u64> {
    let k = chunks as u64;
    (0..k).map(|i| total / k + u64::from(i < total % k)).collect()
}
