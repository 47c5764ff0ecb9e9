use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{chunk_rng, chunk_sizes, EstimateRecord, Method, SimulationConfig};
use crate::dist::{TiltedTruncatedTable, WeibullLikeSpec};
use crate::error::{Error, Result};
use crate::numeric::{log1m_exp, log_add_exp, log_binomial, log_sum_exp, LogMeanAccumulator};
use crate::verify::bounds::{remainder_log_ceiling, term_log_ceiling};

const STREAM_NAIVE: u64 = 1;
const STREAM_NAIVE_TRUNCATED: u64 = 2;
const STREAM_BLOCK: u64 = 3;
const STREAM_NAIVE_SHIFTED: u64 = 4;
const STREAM_PI_BASE: u64 = 1 << 32;

const STREAM_PI_MAIN_BASE: u64 = 2 << 32;

/// Terms tried before the automatic `m_max` rule gives up.
const AUTO_MAX_TERMS: u64 = 64;
/// The pilot pass of a decomposition uses `1 / PILOT_DIVISOR` of the budget.
const PILOT_DIVISOR: u64 = 10;
const MAIN_FLOOR_SHARE: f64 = 0.05;
/// Automatic `m_max` stops once the next term's ceiling is this many nats
/// below the running estimate.
const AUTO_MARGIN_NATS: f64 = 10.0;

/// How many decomposition terms to estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MMax {
    Fixed(u64),
    /// Stop at the smallest `m` whose analytic ceiling (with zero slack)
    /// falls 10 nats below the running estimate.
    Auto,
}

/// A block of i.i.d. centered summands: `jumps` of them at or above
/// `cutoff`, `truncated` of them below it, and the event that their sum
/// reaches `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockEvent {
    pub jumps: u64,
    pub truncated: u64,
    pub threshold: f64,
    pub cutoff: f64,
    /// Tilt applied to the truncated summands.
    pub tilt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermEstimate {
    pub m: u64,
    pub log_binomial: f64,
    pub tilt: f64,
    pub record: EstimateRecord,
}

impl TermEstimate {
    /// `log(binom(n, m) Pi_{n,m})`.
    pub fn log_contribution(&self) -> f64 {
        self.log_binomial + self.record.log_p_hat
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionEstimate {
    pub record: EstimateRecord,
    pub terms: Vec<TermEstimate>,
    pub m_max: u64,
    /// Analytic ceiling on the neglected terms `m > m_max` (zero slack);
    /// `-inf` when none were neglected.
    pub remainder_log_ceiling: f64,
}

fn zero_hit_upper(num_samples: u64) -> f64 {
    // Exact one-sided 97.5% Clopper–Pearson bound for zero successes.
    log1m_exp(0.025f64.ln() / num_samples as f64)
}

fn count_record(method: Method, cfg: &SimulationConfig, hits: u64, m: Option<u64>) -> EstimateRecord {
    let mut rec = count_record_raw(method, cfg.num_samples, cfg.seed, hits, m);
    rec.n = cfg.n;
    rec.x = cfg.x;
    rec
}

fn count_record_raw(method: Method, n: u64, seed: u64, hits: u64, m: Option<u64>) -> EstimateRecord {
    let (log_p_hat, std_err_log, zero_hits, log_p_upper) = if hits == 0 {
        (f64::NEG_INFINITY, 0.0, true, Some(zero_hit_upper(n)))
    } else {
        let p = hits as f64 / n as f64;
        (p.ln(), ((1.0 - p) / (n as f64 * p)).sqrt(), false, None)
    };
    EstimateRecord {
        method,
        n: 0,
        x: 0.0,
        log_p_hat,
        std_err_log,
        num_samples: n,
        seed,
        m,
        zero_hits,
        log_p_upper,
    }
}

fn count_hits<F>(num_samples: u64, seed: u64, stream: u64, chunks: u32, path_hits: F) -> u64
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> bool + Sync,
{
    chunk_sizes(num_samples, chunks)
        .into_par_iter()
        .enumerate()
        .map(|(i, paths)| {
            let mut rng = chunk_rng(seed, stream, i as u64);
            (0..paths).filter(|_| path_hits(&mut rng)).count() as u64
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum()
}

#[inline]
fn naive_sum<R: Rng>(law: &WeibullLikeSpec, n: u64, rng: &mut R) -> f64 {
    (0..n).map(|_| law.raw_from_level(1.0 - rng.random::<f64>()) - law.mu()).sum()
}

/// Fraction of simulated paths with `S_n >= x`.
pub fn estimate_naive(cfg: &SimulationConfig) -> Result<EstimateRecord> {
    cfg.validate()?;
    let law = cfg.law;
    let hits = count_hits(cfg.num_samples, cfg.seed, STREAM_NAIVE, cfg.chunk_count, |rng| {
        naive_sum(&law, cfg.n, rng) >= cfg.x
    });
    Ok(count_record(Method::Naive, cfg, hits, None))
}

/// Naive estimate of `P(S_n >= x)` for any real `x`, including `x <= 0`.
pub(crate) fn naive_sum_at_least(
    law: &WeibullLikeSpec,
    n: u64,
    x: f64,
    num_samples: u64,
    seed: u64,
    chunks: u32,
) -> EstimateRecord {
    let hits = count_hits(num_samples, seed, STREAM_NAIVE_SHIFTED, chunks, |rng| naive_sum(law, n, rng) >= x);
    let mut rec = count_record_raw(Method::Naive, num_samples, seed, hits, None);
    rec.n = n;
    rec.x = x;
    rec
}

/// Naive estimate of `P(S_n >= x, all X_i < cutoff)`, i.e. `Pi_{n,0}(x)`.
pub fn estimate_naive_truncated(cfg: &SimulationConfig) -> Result<EstimateRecord> {
    cfg.validate()?;
    let law = cfg.law;
    let hits = count_hits(cfg.num_samples, cfg.seed, STREAM_NAIVE_TRUNCATED, cfg.chunk_count, |rng| {
        let mut total = 0.0;
        for _ in 0..cfg.n {
            let y = law.raw_from_level(1.0 - rng.random::<f64>()) - law.mu();
            if y >= cfg.cutoff {
                return false;
            }
            total += y;
        }
        total >= cfg.x
    });
    Ok(count_record(Method::Naive, cfg, hits, Some(0)))
}

/// Shared sampler state for one block.
struct BlockSampler<'a> {
    law: &'a WeibullLikeSpec,
    event: BlockEvent,
    table: Option<Arc<TiltedTruncatedTable>>,
    /// Exponential coordinate of the cutoff: `-log P(Y >= cutoff)`.
    s_cut: f64,
}

impl<'a> BlockSampler<'a> {
    fn new(law: &'a WeibullLikeSpec, event: BlockEvent, table: Option<Arc<TiltedTruncatedTable>>) -> Result<Self> {
        if !(event.cutoff > -law.mu() && event.cutoff.is_finite()) {
            return Err(Error::domain(format!("cutoff must exceed -mu = {}, got {}", -law.mu(), event.cutoff)));
        }
        if !event.threshold.is_finite() {
            return Err(Error::domain("threshold must be finite"));
        }
        if event.truncated > 0 && table.is_none() {
            return Err(Error::numeric("truncated block without a tilted table"));
        }
        Ok(Self {
            law,
            event,
            table,
            s_cut: -law.log_survival_centered(event.cutoff),
        })
    }

    /// Log of one path's weighted contribution to
    /// `P(sum >= threshold, jumps >= cutoff, rest < cutoff) / P(Y >= cutoff)^jumps`.
    #[inline]
    fn path<R: Rng>(&self, rng: &mut R) -> f64 {
        let mu = self.law.mu();
        let mut total = 0.0;
        let mut log_w = 0.0;
        if let Some(table) = &self.table {
            for _ in 0..self.event.truncated {
                total += table.sample_tilted(rng.random::<f64>());
            }
            log_w = self.event.truncated as f64 * table.log_normalizer() - table.lambda() * total;
        }
        if self.event.jumps == 0 {
            return if total >= self.event.threshold { log_w } else { f64::NEG_INFINITY };
        }
        for _ in 1..self.event.jumps {
            total += self.law.conditional_from_level(self.s_cut, 1.0 - rng.random::<f64>()) - mu;
        }
        // The last large summand is integrated out exactly.
        let needed = (self.event.threshold - total).max(self.event.cutoff);
        log_w + self.law.log_survival_centered(needed) + self.s_cut
    }

    fn run(&self, num_samples: u64, seed: u64, stream: u64, chunks: u32) -> LogMeanAccumulator {
        let parts: Vec<LogMeanAccumulator> = chunk_sizes(num_samples, chunks)
            .into_par_iter()
            .enumerate()
            .map(|(i, paths)| {
                let mut rng = chunk_rng(seed, stream, i as u64);
                let mut acc = LogMeanAccumulator::new();
                for _ in 0..paths {
                    acc.push(self.path(&mut rng));
                }
                acc
            })
            .collect();
        parts.iter().fold(LogMeanAccumulator::new(), |mut a, b| {
            a.merge(b);
            a
        })
    }

    fn log_estimate(&self, acc: &LogMeanAccumulator) -> f64 {
        if acc.all_zero() {
            f64::NEG_INFINITY
        } else {
            acc.log_mean() - self.event.jumps as f64 * self.s_cut
        }
    }

    fn record(&self, acc: &LogMeanAccumulator, seed: u64, method: Method, m: Option<u64>) -> EstimateRecord {
        EstimateRecord {
            method,
            n: self.event.jumps + self.event.truncated,
            x: self.event.threshold,
            log_p_hat: self.log_estimate(acc),
            std_err_log: acc.std_err_log(),
            num_samples: acc.count(),
            seed,
            m,
            zero_hits: acc.all_zero(),
            log_p_upper: None,
        }
    }
}

/// Tilted tables keyed by tilt, for a fixed law, cutoff and grid.
struct TableCache<'a> {
    law: &'a WeibullLikeSpec,
    cutoff: f64,
    grid_points: usize,
    tables: Vec<Arc<TiltedTruncatedTable>>,
}

impl<'a> TableCache<'a> {
    fn new(law: &'a WeibullLikeSpec, cutoff: f64, grid_points: usize) -> Self {
        Self {
            law,
            cutoff,
            grid_points,
            tables: Vec::new(),
        }
    }

    fn get(&mut self, lambda: f64) -> Result<Arc<TiltedTruncatedTable>> {
        if let Some(t) = self.tables.iter().find(|t| t.lambda() == lambda) {
            return Ok(Arc::clone(t));
        }
        let t = Arc::new(self.law.build_tilted_table(self.cutoff, lambda, self.grid_points)?);
        self.tables.push(Arc::clone(&t));
        Ok(t)
    }
}

fn check_budget(num_samples: u64, chunks: u32) -> Result<()> {
    if num_samples == 0 || chunks == 0 {
        return Err(Error::domain("num_samples and chunk_count must be positive"));
    }
    Ok(())
}

/// Importance-sampling estimate of the block event
/// `P(sum >= threshold, jumps summands >= cutoff, truncated summands < cutoff)`.
pub fn estimate_block(
    law: &WeibullLikeSpec,
    event: BlockEvent,
    num_samples: u64,
    seed: u64,
    chunk_count: u32,
    grid_points: usize,
) -> Result<EstimateRecord> {
    check_budget(num_samples, chunk_count)?;
    let table = if event.truncated > 0 {
        Some(Arc::new(law.build_tilted_table(event.cutoff, event.tilt, grid_points)?))
    } else {
        None
    };
    let sampler = BlockSampler::new(law, event, table)?;
    let acc = sampler.run(num_samples, seed, STREAM_BLOCK, chunk_count);
    Ok(sampler.record(&acc, seed, Method::ImportanceSampling, None))
}

fn pi_sampler<'a>(cfg: &'a SimulationConfig, m: u64, cache: &mut TableCache<'_>) -> Result<BlockSampler<'a>> {
    if m > cfg.n {
        return Err(Error::domain(format!("m = {m} exceeds n = {}", cfg.n)));
    }
    let event = BlockEvent {
        jumps: m,
        truncated: cfg.n - m,
        threshold: cfg.x,
        cutoff: cfg.cutoff,
        tilt: cfg.tilt_for(m)?,
    };
    let table = if event.truncated > 0 { Some(cache.get(event.tilt)?) } else { None };
    BlockSampler::new(&cfg.law, event, table)
}

/// Estimate of `Pi_{n,m}(x)` with the full sample budget of `cfg`.
pub fn estimate_pi(cfg: &SimulationConfig, m: u64) -> Result<EstimateRecord> {
    cfg.validate()?;
    let mut cache = TableCache::new(&cfg.law, cfg.cutoff, cfg.grid_points);
    let sampler = pi_sampler(cfg, m, &mut cache)?;
    let acc = sampler.run(cfg.num_samples, cfg.seed, STREAM_PI_BASE + m, cfg.chunk_count);
    let mut rec = sampler.record(&acc, cfg.seed, Method::PiTerm, Some(m));
    rec.n = cfg.n;
    Ok(rec)
}

/// Splits `total` in proportion to `weights`, with `floor_share` of it
/// spread evenly first. All-zero weights give an even split.
fn allocate(total: u64, weights: &[f64], floor_share: f64) -> Vec<u64> {
    let k = weights.len() as u64;
    let sum: f64 = weights.iter().sum();
    if !(sum > 0.0 && sum.is_finite()) {
        return (0..k).map(|i| total / k + u64::from(i < total % k)).collect();
    }
    let floor = ((total as f64 * floor_share) as u64) / k;
    let rest = total - floor * k;
    let mut out: Vec<u64> = weights
        .iter()
        .map(|w| floor + (rest as f64 * w / sum).floor() as u64)
        .collect();
    let short = total - out.iter().sum::<u64>();
    let top = weights
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    out[top] += short;
    out
}

/// `sum_{m <= m_max} binom(n, m) Pi_{n,m}(x)` with per-term estimates.
///
/// A pilot pass spends a tenth of the budget evenly over the candidate terms
/// and, under `MMax::Auto`, fixes `m_max`. The rest is allocated in
/// proportion to each term's estimated standard deviation (with 5% spread
/// evenly), and pilot and main paths are pooled. Every term receives at
/// least two pilot paths, so tiny budgets may be exceeded.
pub fn estimate_decomposition(cfg: &SimulationConfig, m_max: MMax) -> Result<DecompositionEstimate> {
    cfg.validate()?;
    let law = cfg.law;
    let limit = match m_max {
        MMax::Fixed(k) => {
            if k < 1 || k > cfg.n {
                return Err(Error::domain(format!("m_max must lie in [1, n] = [1, {}], got {k}", cfg.n)));
            }
            k
        }
        MMax::Auto => cfg.n.min(AUTO_MAX_TERMS),
    };
    let pilot = (cfg.num_samples / PILOT_DIVISOR / (limit + 1)).max(2);

    let mut cache = TableCache::new(&law, cfg.cutoff, cfg.grid_points);
    let mut samplers = Vec::new();
    let mut accs = Vec::new();
    let mut running = f64::NEG_INFINITY;
    for m in 0..=limit {
        let sampler = pi_sampler(cfg, m, &mut cache)?;
        let acc = sampler.run(pilot, cfg.seed, STREAM_PI_BASE + m, cfg.chunk_count);
        running = log_add_exp(running, log_binomial(cfg.n, m) + sampler.log_estimate(&acc));
        samplers.push(sampler);
        accs.push(acc);
        if m_max == MMax::Auto && m >= 1 && m < cfg.n {
            let next = term_log_ceiling(0.0, law.q(), law.epsilon(), law.sigma2(), cfg.n, m + 1, cfg.x);
            if next < running - AUTO_MARGIN_NATS {
                break;
            }
        }
    }

    let used = pilot * samplers.len() as u64;
    let remaining = cfg.num_samples.saturating_sub(used);
    if remaining > 0 {
        // Per-path standard deviation of each term's contribution, relative
        // to the running total.
        let weights: Vec<f64> = samplers
            .iter()
            .zip(&accs)
            .enumerate()
            .map(|(m, (s, a))| {
                let lt = log_binomial(cfg.n, m as u64) + s.log_estimate(a);
                if lt.is_finite() {
                    (lt - running).exp() * a.std_err_log() * (a.count() as f64).sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        for (m, extra) in allocate(remaining, &weights, MAIN_FLOOR_SHARE).into_iter().enumerate() {
            if extra > 0 {
                let more = samplers[m].run(extra, cfg.seed, STREAM_PI_MAIN_BASE + m as u64, cfg.chunk_count);
                accs[m].merge(&more);
            }
        }
    }

    let terms: Vec<TermEstimate> = samplers
        .iter()
        .zip(&accs)
        .enumerate()
        .map(|(m, (s, a))| {
            let m = m as u64;
            let mut record = s.record(a, cfg.seed, Method::PiTerm, Some(m));
            record.n = cfg.n;
            TermEstimate {
                m,
                log_binomial: log_binomial(cfg.n, m),
                tilt: s.event.tilt,
                record,
            }
        })
        .collect();
    let used_max = terms.last().map(|t| t.m).unwrap_or(0);

    let logs: Vec<f64> = terms.iter().map(TermEstimate::log_contribution).collect();
    let total = log_sum_exp(&logs);
    let zero_hits = total == f64::NEG_INFINITY;
    let std_err_log = if zero_hits {
        0.0
    } else {
        terms
            .iter()
            .zip(&logs)
            .filter(|(_, l)| l.is_finite())
            .map(|(t, l)| (2.0 * (l - total)).exp() * t.record.std_err_log.powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let record = EstimateRecord {
        method: Method::Decomposition,
        n: cfg.n,
        x: cfg.x,
        log_p_hat: total,
        std_err_log,
        num_samples: terms.iter().map(|t| t.record.num_samples).sum(),
        seed: cfg.seed,
        m: None,
        zero_hits,
        log_p_upper: None,
    };
    Ok(DecompositionEstimate {
        record,
        terms,
        m_max: used_max,
        remainder_log_ceiling: remainder_log_ceiling(0.0, law.q(), law.epsilon(), law.sigma2(), cfg.n, used_max, cfg.x),
    })
}
