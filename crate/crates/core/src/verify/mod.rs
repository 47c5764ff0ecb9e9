//! Desk-scale checks of the asymptotic statements: speed-normalized sweeps
//! over `n`, the interpolation table of `J(C)`, the exact max-jump split and
//! the analytic block bounds against Monte Carlo estimates.

pub mod bounds;

pub use bounds::{
    bound_medium, bound_small, remainder_log_ceiling, term_log_ceiling, BoundParams, DEFAULT_APPLICABLE_FROM_N,
    DEFAULT_DELTA,
};

use serde::{Deserialize, Serialize};

use crate::dist::WeibullLikeSpec;
use crate::error::{Error, Result};
use crate::numeric::log_sum_exp;
use crate::rate::{Branch, RateParams, Regime, RegimeSpec, Speed};
use crate::simulate::{
    estimate_block, estimate_decomposition, estimate_naive, estimate_pi, max_jump_exact, BlockEvent, EstimateRecord,
    MMax, MaxJumpExact, SimulationConfig, DEFAULT_CHUNKS, DEFAULT_GRID_POINTS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    ApproachingFromAbove,
    ApproachingFromBelow,
    NonMonotone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepEstimator {
    Naive,
    Decomposition,
    /// The `m = 0` truncated term alone.
    PiZero,
    /// Exact `P(max_i Y_i >= x_n)`.
    ExactMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: u64,
    pub x_n: f64,
    pub log_p_hat: f64,
    pub std_err_log: f64,
    pub normalized: f64,
    /// Set when the estimate saw no hits; `normalized` is then `-inf`.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub regime: RegimeSpec,
    pub rows: Vec<SweepRow>,
    pub theory_limit: f64,
    pub trend: Trend,
}

/// Monte Carlo settings shared by every row of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepBase {
    pub law: WeibullLikeSpec,
    pub num_samples: u64,
    pub seed: u64,
    pub chunk_count: u32,
    pub grid_points: usize,
    pub m_max: MMax,
    pub tilt: Option<f64>,
}

impl SweepBase {
    pub fn new(law: WeibullLikeSpec, num_samples: u64, seed: u64) -> Self {
        Self {
            law,
            num_samples,
            seed,
            chunk_count: DEFAULT_CHUNKS,
            grid_points: DEFAULT_GRID_POINTS,
            m_max: MMax::Auto,
            tilt: None,
        }
    }

    fn config(&self, n: u64, x: f64) -> Result<SimulationConfig> {
        let mut cfg = SimulationConfig::new(self.law, n, x, self.num_samples, self.seed)?
            .with_chunks(self.chunk_count)?
            .with_tilt(self.tilt)?;
        cfg.grid_points = self.grid_points;
        Ok(cfg)
    }
}

/// `log_p / v_n` with `v_n` the speed of `regime`.
pub fn normalize(regime: &RegimeSpec, n: u64, x_n: f64, log_p: f64) -> f64 {
    log_p / regime.speed.value(n as f64, x_n, regime.epsilon)
}

/// Reads the direction from the last three finite rows.
///
/// The sweep approaches from above (below) when both of the last two steps
/// shrink the distance to `limit` while staying above (below) it; any other
/// pattern, or a flagged row among the last three, is `NonMonotone`.
pub fn classify_trend(rows: &[SweepRow], limit: f64) -> Trend {
    if rows.len() < 2 {
        return Trend::NonMonotone;
    }
    let tail = &rows[rows.len().saturating_sub(3)..];
    if tail.iter().any(|r| r.flagged || !r.normalized.is_finite()) {
        return Trend::NonMonotone;
    }
    let gaps: Vec<f64> = tail.iter().map(|r| r.normalized - limit).collect();
    let shrinking = gaps.windows(2).all(|w| w[1].abs() < w[0].abs());
    let above = gaps.iter().all(|g| *g >= 0.0);
    let below = gaps.iter().all(|g| *g <= 0.0);
    match (shrinking, above, below) {
        (true, true, _) => Trend::ApproachingFromAbove,
        (true, _, true) => Trend::ApproachingFromBelow,
        _ => Trend::NonMonotone,
    }
}

fn row_from(regime: &RegimeSpec, n: u64, x_n: f64, speed_x: f64, rec: &EstimateRecord) -> SweepRow {
    SweepRow {
        n,
        x_n,
        log_p_hat: rec.log_p_hat,
        std_err_log: rec.std_err_log,
        normalized: normalize(regime, n, speed_x, rec.log_p_hat),
        flagged: rec.zero_hits,
    }
}

fn check_n_list(n_list: &[u64]) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::domain("n_list is empty"));
    }
    if n_list[0] == 0 || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("n_list must be positive and strictly increasing"));
    }
    Ok(())
}

fn exact_max_record(law: &WeibullLikeSpec, n: u64, x: f64, seed: u64) -> Result<EstimateRecord> {
    let MaxJumpExact { log_p_max, .. } = max_jump_exact(law, n, x)?;
    Ok(EstimateRecord {
        method: crate::simulate::Method::ExactMax,
        n,
        x,
        log_p_hat: log_p_max,
        std_err_log: 0.0,
        num_samples: 0,
        seed,
        m: None,
        zero_hits: log_p_max == f64::NEG_INFINITY,
        log_p_upper: None,
    })
}

/// One row per `n` with `x_n = c n^alpha`, normalized by the regime's speed.
pub fn sweep(base: &SweepBase, regime: &RegimeSpec, n_list: &[u64], estimator: SweepEstimator) -> Result<SweepResult> {
    check_n_list(n_list)?;
    if (regime.epsilon - base.law.epsilon()).abs() > 1e-12 {
        return Err(Error::domain("regime and law disagree on epsilon"));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let x_n = regime.threshold(n);
        let rec = match estimator {
            SweepEstimator::Naive => estimate_naive(&base.config(n, x_n)?)?,
            SweepEstimator::Decomposition => {
                let m_max = match base.m_max {
                    MMax::Fixed(k) => MMax::Fixed(k.min(n)),
                    MMax::Auto => MMax::Auto,
                };
                estimate_decomposition(&base.config(n, x_n)?, m_max)?.record
            }
            SweepEstimator::PiZero => estimate_pi(&base.config(n, x_n)?, 0)?,
            SweepEstimator::ExactMax => exact_max_record(&base.law, n, x_n, base.seed)?,
        };
        rows.push(row_from(regime, n, x_n, x_n, &rec));
    }
    let trend = classify_trend(&rows, regime.limit);
    Ok(SweepResult {
        regime: *regime,
        rows,
        theory_limit: regime.limit,
        trend,
    })
}

/// Sweep of `Pi_{n,0}(t x_n)` with cutoff `x_n^eps` on the transition scale
/// `x_n = C n^(1/(1+eps))`, normalized by `x_n^2 / n`; the limit is
/// `-t^2 / (2 sigma^2)`.
pub fn check_pi0_limit(base: &SweepBase, c: f64, t: f64, n_list: &[u64]) -> Result<SweepResult> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::domain(format!("t must lie in (0, 1], got {t}")));
    }
    check_n_list(n_list)?;
    let law = base.law;
    let params = RateParams::from(&law);
    let mut regime = params.transition_regime(c)?;
    regime.limit = -t * t / (2.0 * law.sigma2());
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let x_n = regime.threshold(n);
        let cfg = base.config(n, t * x_n)?.with_cutoff(x_n.powf(law.epsilon()))?;
        let rec = estimate_pi(&cfg, 0)?;
        rows.push(row_from(&regime, n, x_n, x_n, &rec));
    }
    let trend = classify_trend(&rows, regime.limit);
    Ok(SweepResult {
        regime,
        theory_limit: regime.limit,
        rows,
        trend,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterpolationRow {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "J")]
    pub j: f64,
    /// `C <= C_eps`, where `J = 1/(2 sigma^2)`.
    pub gaussian_branch: bool,
    /// `C^(1+eps) J(C)`, which tends to `q`.
    pub scaled: f64,
    pub gap_from_q: f64,
}

pub fn check_interpolation(epsilon: f64, q: f64, sigma2: f64, c_list: &[f64]) -> Result<Vec<InterpolationRow>> {
    let params = RateParams::new(epsilon, q, sigma2)?;
    c_list
        .iter()
        .map(|&c| {
            let r = params.rate_transition(c)?;
            let scaled = c.powf(1.0 + epsilon) * r.j;
            Ok(InterpolationRow {
                c,
                j: r.j,
                gaussian_branch: r.branch == Branch::BelowCritical,
                scaled,
                gap_from_q: (scaled - q).abs(),
            })
        })
        .collect()
}

/// Split of `P(S_n >= x)` into `P_n` (no summand reaches `x`) and `R_n`
/// (at least one does), with the exact brackets
/// `P(S_{n-1} >= 0) P(Y >= x) <= R_n <= n P(Y >= x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxJumpSplit {
    pub n: u64,
    pub x: f64,
    pub log_p_n: EstimateRecord,
    pub log_r_n: f64,
    pub std_err_log_r_n: f64,
    /// `log P(S_{n-1} >= 0) + log P(Y >= x)`, the first factor estimated.
    pub log_r_lower: f64,
    /// `log(n P(Y >= x))`.
    pub log_r_upper: f64,
    pub exact_max: MaxJumpExact,
}

impl MaxJumpSplit {
    /// `R_n` inside its brackets, up to `k` standard errors.
    pub fn bracketed(&self, k: f64) -> bool {
        let slack = k * self.std_err_log_r_n;
        self.log_r_n + slack >= self.log_r_lower && self.log_r_n - slack <= self.log_r_upper
    }

    /// The one-big-jump part dominates.
    pub fn jump_dominates(&self) -> bool {
        self.log_r_n >= self.log_p_n.log_p_hat
    }
}

/// Number of large-summand counts `m` summed for `R_n`.
const SPLIT_TERMS: u64 = 3;

pub fn max_jump_split(base: &SweepBase, n: u64, x: f64) -> Result<MaxJumpSplit> {
    let law = base.law;
    let cfg = base.config(n, x)?.with_cutoff(x)?;
    let top = SPLIT_TERMS.min(n);
    let per = (base.num_samples / (top + 1)).max(2);
    let cfg = cfg.with_samples(per)?;
    let p_n = estimate_pi(&cfg, 0)?;
    let mut logs = Vec::new();
    let mut ses = Vec::new();
    for m in 1..=top {
        let r = estimate_pi(&cfg, m)?;
        logs.push(crate::numeric::log_binomial(n, m) + r.log_p_hat);
        ses.push(r.std_err_log);
    }
    let log_r_n = log_sum_exp(&logs);
    let std_err_log_r_n = logs
        .iter()
        .zip(&ses)
        .filter(|(l, _)| l.is_finite())
        .map(|(l, s)| (2.0 * (l - log_r_n)).exp() * s * s)
        .sum::<f64>()
        .sqrt();
    let log_s = law.log_survival_centered(x);
    let log_nonneg = if n == 1 {
        0.0
    } else {
        crate::simulate::naive_sum_at_least(&law, n - 1, 0.0, per, base.seed, base.chunk_count).log_p_hat
    };
    Ok(MaxJumpSplit {
        n,
        x,
        log_p_n: p_n,
        log_r_n,
        std_err_log_r_n,
        log_r_lower: log_nonneg + log_s,
        log_r_upper: (n as f64).ln() + log_s,
        exact_max: max_jump_exact(&law, n, x)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundEvent {
    /// `S_n >= u` with every summand below `x_n^eps`.
    Small,
    /// `S_m >= u` with every summand at or above `x_n^eps`.
    Medium,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub event: BoundEvent,
    pub n: u64,
    pub m: u64,
    pub u: f64,
    pub x_n: f64,
    pub bound: f64,
    pub estimate: EstimateRecord,
    /// `log_p_hat - 2 SE <= bound`; always true with zero hits.
    pub holds: bool,
    /// `n >= applicable_from_n`; below it the comparison is heuristic.
    pub applicable: bool,
}

#[allow(clippy::too_many_arguments)]
fn bound_check(
    event: BoundEvent,
    params: &BoundParams,
    n: u64,
    m: u64,
    u: f64,
    x_n: f64,
    bound: f64,
    estimate: EstimateRecord,
) -> BoundCheck {
    let holds = estimate.zero_hits || estimate.log_p_hat - 2.0 * estimate.std_err_log <= bound;
    BoundCheck {
        event,
        n,
        m,
        u,
        x_n,
        bound,
        estimate,
        holds,
        applicable: params.applies(n),
    }
}

/// Compares both block bounds with estimates on the transition scale
/// `x_n = C n^(1/(1+eps))`, at deviations `u = f x_n` for each `f` in
/// `u_fractions`, using `m` large summands for the medium block.
pub fn check_bounds(
    base: &SweepBase,
    params: &BoundParams,
    c: f64,
    n: u64,
    m: u64,
    u_fractions: &[f64],
) -> Result<Vec<BoundCheck>> {
    let law = base.law;
    let rate = RateParams::from(&law);
    let regime = rate.transition_regime(c)?;
    debug_assert!(regime.regime == Regime::Transition && regime.speed == Speed::Quadratic);
    let x_n = regime.threshold(n);
    let cutoff = x_n.powf(law.epsilon());
    let mut out = Vec::new();
    for &f in u_fractions {
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::domain(format!("u fraction must lie in (0, 1], got {f}")));
        }
        let u = f * x_n;
        let cfg = base.config(n, u)?.with_cutoff(cutoff.min(u))?;
        let small = estimate_pi(&cfg, 0)?;
        out.push(bound_check(
            BoundEvent::Small,
            params,
            n,
            0,
            u,
            x_n,
            bound_small(params, n, u, law.sigma2())?,
            small,
        ));
        let event = BlockEvent {
            jumps: m,
            truncated: 0,
            threshold: u,
            cutoff,
            tilt: 0.0,
        };
        let medium = estimate_block(&law, event, base.num_samples, base.seed, base.chunk_count, base.grid_points)?;
        out.push(bound_check(
            BoundEvent::Medium,
            params,
            n,
            m,
            u,
            x_n,
            bound_medium(params, law.q(), law.epsilon(), m, u, x_n)?,
            medium,
        ));
    }
    Ok(out)
}
