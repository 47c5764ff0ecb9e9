//! One function per subcommand: decode merged parameters, fill defaults,
//! run the pipeline, and return the resolved parameters with a report.

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use semiexp::rate::RegimeSpec;
use semiexp::simulate::{
    draw_samples, estimate_decomposition, estimate_naive, estimate_pi, max_jump_exact, SampleKind, SimulationConfig,
    DEFAULT_CHUNKS, DEFAULT_GRID_POINTS,
};
use semiexp::verify::{
    check_bounds, check_interpolation, check_pi0_limit, classify_trend, max_jump_split, sweep, BoundParams,
    SweepBase, SweepEstimator, SweepResult, DEFAULT_APPLICABLE_FROM_N, DEFAULT_DELTA,
};
use semiexp::{EstimateRecord, RateParams, Regime, WeibullLikeSpec};

use crate::config::{check_allowed, decode, present_fields, Count, MMaxArg};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Report, Table};

const DEFAULT_SAMPLES: u64 = 100_000;
const DEFAULT_DRAWS: u64 = 1000;
const DEFAULT_GAUSSIAN_ALPHA: f64 = 0.55;
const DEFAULT_MAX_JUMP_ALPHA: f64 = 0.9;

pub type Outcome = (Map<String, Value>, Report);

fn need<T>(v: Option<T>, name: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::domain(format!("missing required parameter: {name}")))
}

fn single<T: Copy>(v: &Option<Vec<T>>, name: &str) -> CliResult<T> {
    match v.as_deref() {
        Some([x]) => Ok(*x),
        Some(_) => Err(CliError::domain(format!("{name} takes a single value here"))),
        None => Err(CliError::domain(format!("missing required parameter: {name}"))),
    }
}

/// serde name of a unit enum value.
fn tag<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        _ => String::new(),
    }
}

/// The law from `epsilon` and either `q` (default 1) or `sigma2`.
fn resolve_law(epsilon: Option<f64>, q: &mut Option<f64>, sigma2: Option<f64>) -> CliResult<WeibullLikeSpec> {
    let eps = need(epsilon, "epsilon")?;
    match (*q, sigma2) {
        (Some(_), Some(_)) => Err(CliError::domain(
            "the law takes either q or sigma2 (the variance fixes q), not both",
        )),
        (None, Some(s2)) => Ok(WeibullLikeSpec::with_variance(eps, s2)?),
        (q0, None) => {
            let v = q0.unwrap_or(1.0);
            *q = Some(v);
            Ok(WeibullLikeSpec::new(v, eps)?)
        }
    }
}

/// Free `(epsilon, q, sigma2)`: `q` defaults to 1 and `sigma2` to the
/// variance of the law with that `q`.
fn resolve_rate_params(epsilon: Option<f64>, q: &mut Option<f64>, sigma2: &mut Option<f64>) -> CliResult<RateParams> {
    let eps = need(epsilon, "epsilon")?;
    let qv = *q.get_or_insert(1.0);
    let s2 = match *sigma2 {
        Some(s) => s,
        None => WeibullLikeSpec::new(qv, eps)?.sigma2(),
    };
    *sigma2 = Some(s2);
    Ok(RateParams::new(eps, qv, s2)?)
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(deny_unknown_fields)]
pub struct RateArgs {
    /// Tail exponent eps in (0, 0.95].
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Tail constant q [default: 1].
    #[arg(long)]
    pub q: Option<f64>,
    /// Variance [default: variance of the law with this q and eps].
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Transition constants C, comma separated.
    #[arg(long = "C", value_delimiter = ',')]
    #[serde(rename = "C")]
    pub c: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct RateOut {
    critical_constants: semiexp::CriticalConstants,
    rates: Vec<semiexp::TransitionRate>,
}

pub fn rate(map: Map<String, Value>) -> CliResult<Outcome> {
    let mut a: RateArgs = decode(map)?;
    let params = resolve_rate_params(a.epsilon, &mut a.q, &mut a.sigma2)?;
    let cs = a.c.clone().ok_or_else(|| CliError::domain("missing required parameter: C"))?;
    let rates = cs
        .iter()
        .map(|&c| params.rate_transition(c))
        .collect::<semiexp::Result<Vec<_>>>()?;
    let crit = params.critical_constants();
    let mut table = Table::new(&["C", "t_star", "J", "branch"]);
    for r in &rates {
        table.push(vec![r.c.into(), r.t_star.into(), r.j.into(), Cell::Text(format!("{:?}", r.branch))]);
    }
    let report = Report::new(
        &RateOut {
            critical_constants: crit,
            rates,
        },
        table,
    )
    .note(format!("c_prime: {:?}", crit.c_prime))
    .note(format!("c_eps: {:?}", crit.c_eps));
    Ok((present_fields(&a), report))
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(deny_unknown_fields)]
pub struct RegimesArgs {
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Growth exponents alpha of x_n = C n^alpha, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
    /// Scale constant C [default: 1].
    #[arg(long = "C")]
    #[serde(rename = "C")]
    pub c: Option<f64>,
}

pub fn regimes(map: Map<String, Value>) -> CliResult<Outcome> {
    let mut a: RegimesArgs = decode(map)?;
    let params = resolve_rate_params(a.epsilon, &mut a.q, &mut a.sigma2)?;
    let c = *a.c.get_or_insert(1.0);
    let alphas = a.alpha.clone().ok_or_else(|| CliError::domain("missing required parameter: alpha"))?;
    let specs = alphas
        .iter()
        .map(|&al| params.classify_regime(al, c))
        .collect::<semiexp::Result<Vec<_>>>()?;
    let mut table = Table::new(&["alpha", "C", "regime", "speed", "limit"]);
    for s in &specs {
        table.push(vec![
            s.alpha.into(),
            s.c.into(),
            Cell::Text(tag(&s.regime)),
            Cell::Text(tag(&s.speed)),
            s.limit.into(),
        ]);
    }
    Ok((present_fields(&a), Report::new(&specs, table)))
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SampleKindArg {
    Raw,
    Conditional,
    Tilted,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(deny_unknown_fields)]
pub struct SampleArgs {
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Number of draws [default: 1000].
    #[arg(long)]
    pub count: Option<Count>,
    /// Law to draw from [default: raw].
    #[arg(long, value_enum)]
    pub kind: Option<SampleKindArg>,
    /// Conditioning level on the raw scale (conditional).
    #[arg(long)]
    pub a: Option<f64>,
    /// Truncation point on the centered scale (tilted).
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// Tilt (tilted) [default: 0].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Table size (tilted) [default: 2048].
    #[arg(long)]
    pub grid_points: Option<usize>,
}

#[derive(Serialize)]
struct SampleOut {
    law: WeibullLikeSpec,
    sample_kind: SampleKind,
    samples: Vec<f64>,
}

pub fn sample(map: Map<String, Value>, seed: u64) -> CliResult<Outcome> {
    let kind_now: SampleKindArg = match map.get("kind") {
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| CliError::domain(format!("invalid kind: {e}")))?,
        None => SampleKindArg::Raw,
    };
    let mut allowed = vec!["epsilon", "q", "sigma2", "count", "kind"];
    match kind_now {
        SampleKindArg::Raw => {}
        SampleKindArg::Conditional => allowed.push("a"),
        SampleKindArg::Tilted => allowed.extend(["cutoff", "lambda", "grid_points"]),
    }
    check_allowed(&map, &allowed, &format!("sample --kind {}", tag(&kind_now)))?;
    let mut a: SampleArgs = decode(map)?;
    let law = resolve_law(a.epsilon, &mut a.q, a.sigma2)?;
    let count = a.count.get_or_insert(Count(DEFAULT_DRAWS)).0 as usize;
    a.kind = Some(kind_now);
    let kind = match kind_now {
        SampleKindArg::Raw => SampleKind::Raw,
        SampleKindArg::Conditional => SampleKind::Conditional { a: need(a.a, "a")? },
        SampleKindArg::Tilted => SampleKind::Tilted {
            cutoff: need(a.cutoff, "cutoff")?,
            lambda: *a.lambda.get_or_insert(0.0),
            grid_points: *a.grid_points.get_or_insert(DEFAULT_GRID_POINTS),
        },
    };
    let samples = draw_samples(&law, kind, count, seed)?;
    let mut table = Table::new(&["index", "value"]);
    for (i, v) in samples.iter().enumerate() {
        table.push(vec![Cell::Int(i as u64), (*v).into()]);
    }
    let out = SampleOut {
        law,
        sample_kind: kind,
        samples,
    };
    Ok((present_fields(&a), Report::new(&out, table)))
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Naive,
    Decomposition,
    Pi,
    ExactMax,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(deny_unknown_fields)]
pub struct SimulateArgs {
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Number of summands.
    #[arg(long)]
    pub n: Option<Count>,
    /// Threshold on the centered sum.
    #[arg(long)]
    pub x: Option<f64>,
    /// Estimator [default: decomposition].
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Monte Carlo paths, e.g. 1e6 [default: 1e5].
    #[arg(long)]
    pub samples: Option<Count>,
    /// Seed chunks [default: 64].
    #[arg(long)]
    pub chunks: Option<u32>,
    /// Truncation point on the centered scale [default: x^eps].
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// Tilt for every truncated block [default: chosen per term].
    #[arg(long)]
    pub tilt: Option<f64>,
    /// Tilted table size [default: 2048].
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Number of large summands (pi).
    #[arg(long)]
    pub m: Option<Count>,
    /// Last decomposition term, or `auto` [default: auto].
    #[arg(long)]
    pub m_max: Option<MMaxArg>,
}

fn record_row(r: &EstimateRecord) -> Vec<Cell> {
    vec![
        Cell::Text(tag(&r.method)),
        r.n.into(),
        r.x.into(),
        r.m.into(),
        r.log_p_hat.into(),
        r.std_err_log.into(),
        r.num_samples.into(),
        r.zero_hits.into(),
        r.log_p_upper.into(),
    ]
}

const RECORD_COLUMNS: [&str; 9] = [
    "method",
    "n",
    "x",
    "m",
    "log_p_hat",
    "std_err_log",
    "num_samples",
    "zero_hits",
    "log_p_upper",
];

pub fn simulate(map: Map<String, Value>, seed: u64) -> CliResult<Outcome> {
    let method: MethodArg = match map.get("method") {
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| CliError::domain(format!("invalid method: {e}")))?,
        None => MethodArg::Decomposition,
    };
    let mut allowed = vec!["epsilon", "q", "sigma2", "n", "x", "method"];
    match method {
        MethodArg::ExactMax => {}
        MethodArg::Naive => allowed.extend(["samples", "chunks"]),
        MethodArg::Pi => allowed.extend(["samples", "chunks", "cutoff", "tilt", "grid_points", "m"]),
        MethodArg::Decomposition => allowed.extend(["samples", "chunks", "cutoff", "tilt", "grid_points", "m_max"]),
    }
    check_allowed(&map, &allowed, &format!("simulate --method {}", tag(&method)))?;
    let mut a: SimulateArgs = decode(map)?;
    a.method = Some(method);
    let law = resolve_law(a.epsilon, &mut a.q, a.sigma2)?;
    let n = need(a.n, "n")?.0;
    let x = need(a.x, "x")?;

    if method == MethodArg::ExactMax {
        let r = max_jump_exact(&law, n, x)?;
        let mut table = Table::new(&["n", "x", "log_s", "n_tail", "p_max", "log_p_max"]);
        table.push(vec![n.into(), x.into(), r.log_s.into(), r.n_tail.into(), r.p_max.into(), r.log_p_max.into()]);
        return Ok((present_fields(&a), Report::new(&r, table)));
    }

    let samples = a.samples.get_or_insert(Count(DEFAULT_SAMPLES)).0;
    let chunks = *a.chunks.get_or_insert(DEFAULT_CHUNKS);
    let mut cfg = SimulationConfig::new(law, n, x, samples, seed)?.with_chunks(chunks)?;
    if method != MethodArg::Naive {
        let cutoff = *a.cutoff.get_or_insert(cfg.cutoff);
        cfg = cfg.with_cutoff(cutoff)?.with_tilt(a.tilt)?;
        cfg.grid_points = *a.grid_points.get_or_insert(DEFAULT_GRID_POINTS);
    }
    let mut table = Table::new(&RECORD_COLUMNS);
    let report = match method {
        MethodArg::Naive => {
            let r = estimate_naive(&cfg)?;
            table.push(record_row(&r));
            Report::new(&r, table)
        }
        MethodArg::Pi => {
            let r = estimate_pi(&cfg, need(a.m, "m")?.0)?;
            table.push(record_row(&r));
            Report::new(&r, table)
        }
        MethodArg::Decomposition => {
            let m_max = *a.m_max.get_or_insert(MMaxArg::Auto);
            let d = estimate_decomposition(&cfg, m_max.into())?;
            for t in &d.terms {
                let mut row = record_row(&t.record);
                // Per-term rows carry log(binom(n, m) Pi_{n,m}).
                row[4] = t.log_contribution().into();
                table.push(row);
            }
            table.push(record_row(&d.record));
            Report::new(&d, table)
                .note(format!("m_max: {}", d.m_max))
                .note(format!("remainder_log_ceiling: {:?}", d.remainder_log_ceiling))
        }
        MethodArg::ExactMax => unreachable!("handled above"),
    };
    Ok((present_fields(&a), report))
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeArg {
    Gaussian,
    Transition,
    MaxJump,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorArg {
    Naive,
    Decomposition,
    PiZero,
    ExactMax,
}

impl From<EstimatorArg> for SweepEstimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Naive => SweepEstimator::Naive,
            EstimatorArg::Decomposition => SweepEstimator::Decomposition,
            EstimatorArg::PiZero => SweepEstimator::PiZero,
            EstimatorArg::ExactMax => SweepEstimator::ExactMax,
        }
    }
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(deny_unknown_fields)]
pub struct SweepArgs {
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long, value_enum)]
    pub regime: Option<RegimeArg>,
    /// Growth exponent [default: 0.55 gaussian, 0.9 max-jump; fixed at
    /// 1/(1+eps) for transition].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Scale constant of x_n = C n^alpha [default: 1].
    #[arg(long = "C")]
    #[serde(rename = "C")]
    pub c: Option<f64>,
    /// Increasing sample sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<Count>>,
    /// [default: decomposition, exact-max for max-jump]
    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorArg>,
    /// Monte Carlo paths per row [default: 1e5].
    #[arg(long)]
    pub samples: Option<Count>,
    #[arg(long)]
    pub chunks: Option<u32>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub m_max: Option<MMaxArg>,
    #[arg(long)]
    pub tilt: Option<f64>,
}

fn sweep_table(r: &SweepResult) -> Table {
    let mut table = Table::new(&["n", "x_n", "log_p_hat", "std_err_log", "normalized", "theory_limit"]);
    for row in &r.rows {
        table.push(vec![
            row.n.into(),
            row.x_n.into(),
            row.log_p_hat.into(),
            row.std_err_log.into(),
            row.normalized.into(),
            r.theory_limit.into(),
        ]);
    }
    table
}

fn sweep_report(r: &SweepResult) -> Report {
    let flagged: Vec<String> = r.rows.iter().filter(|x| x.flagged).map(|x| x.n.to_string()).collect();
    let mut report = Report::new(r, sweep_table(r))
        .note(format!("regime: {}", tag(&r.regime.regime)))
        .note(format!("trend: {}", tag(&r.trend)));
    if !flagged.is_empty() {
        report = report.note(format!("zero-hit rows (n): {}", flagged.join(" ")));
    }
    report
}

fn base_from(law: WeibullLikeSpec, samples: u64, seed: u64, chunks: u32, grid_points: usize) -> SweepBase {
    let mut base = SweepBase::new(law, samples, seed);
    base.chunk_count = chunks;
    base.grid_points = grid_points;
    base
}

pub fn sweep_cmd(map: Map<String, Value>, seed: u64) -> CliResult<Outcome> {
    let regime_now: RegimeArg = match map.get("regime") {
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| CliError::domain(format!("invalid regime: {e}")))?,
        None => return Err(CliError::domain("missing required parameter: regime")),
    };
    let mut allowed = vec![
        "epsilon",
        "q",
        "sigma2",
        "regime",
        "C",
        "n",
        "estimator",
        "samples",
        "chunks",
        "grid_points",
        "m_max",
        "tilt",
    ];
    if regime_now != RegimeArg::Transition {
        allowed.push("alpha");
    }
    check_allowed(&map, &allowed, &format!("sweep --regime {}", tag(&regime_now)))?;
    let mut a: SweepArgs = decode(map)?;
    let law = resolve_law(a.epsilon, &mut a.q, a.sigma2)?;
    let params = RateParams::from(&law);
    let c = *a.c.get_or_insert(1.0);
    let regime: RegimeSpec = match regime_now {
        RegimeArg::Transition => params.transition_regime(c)?,
        RegimeArg::Gaussian => params.classify_regime(*a.alpha.get_or_insert(DEFAULT_GAUSSIAN_ALPHA), c)?,
        RegimeArg::MaxJump => params.classify_regime(*a.alpha.get_or_insert(DEFAULT_MAX_JUMP_ALPHA), c)?,
    };
    let expected = match regime_now {
        RegimeArg::Gaussian => Regime::Gaussian,
        RegimeArg::Transition => Regime::Transition,
        RegimeArg::MaxJump => Regime::MaxJump,
    };
    if regime.regime != expected {
        return Err(CliError::domain(format!(
            "alpha = {} lies in the {} regime for eps = {}, not {}",
            regime.alpha,
            tag(&regime.regime),
            law.epsilon(),
            tag(&regime_now)
        )));
    }
    let estimator = *a.estimator.get_or_insert(match regime_now {
        RegimeArg::MaxJump => EstimatorArg::ExactMax,
        _ => EstimatorArg::Decomposition,
    });
    let ns: Vec<u64> = a
        .n
        .as_ref()
        .ok_or_else(|| CliError::domain("missing required parameter: n"))?
        .iter()
        .map(|c| c.0)
        .collect();
    let samples = a.samples.get_or_insert(Count(DEFAULT_SAMPLES)).0;
    let chunks = *a.chunks.get_or_insert(DEFAULT_CHUNKS);
    let grid = *a.grid_points.get_or_insert(DEFAULT_GRID_POINTS);
    let mut base = base_from(law, samples, seed, chunks, grid);
    base.m_max = (*a.m_max.get_or_insert(MMaxArg::Auto)).into();
    base.tilt = a.tilt;

    if ns.is_empty() || ns[0] == 0 || ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::domain("n must be positive and strictly increasing"));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in &ns {
        eprintln!("sweep: n = {n}");
        let r = sweep(&base, &regime, &[n], estimator.into())?;
        rows.extend(r.rows);
    }
    let result = SweepResult {
        regime,
        trend: classify_trend(&rows, regime.limit),
        theory_limit: regime.limit,
        rows,
    };
    Ok((present_fields(&a), sweep_report(&result)))
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum CheckArg {
    Interpolation,
    Pi0,
    Bounds,
    MaxJumpSplit,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone, Default)]
#[serde(deny_unknown_fields)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub check: Option<CheckArg>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Transition constant(s) C, comma separated.
    #[arg(long = "C", value_delimiter = ',')]
    #[serde(rename = "C")]
    pub c: Option<Vec<f64>>,
    /// Share of x_n carried by the truncated block (pi0) [default: 1].
    #[arg(long)]
    pub t: Option<f64>,
    /// Sample size(s), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<Count>>,
    /// Large summands in the medium block (bounds) [default: 2].
    #[arg(long)]
    pub m: Option<Count>,
    /// Deviations u as fractions of x_n (bounds) [default: 0.25,0.5,1].
    #[arg(long, value_delimiter = ',')]
    pub u_fractions: Option<Vec<f64>>,
    /// Slack of the bounds [default: 0.15].
    #[arg(long)]
    pub delta: Option<f64>,
    /// n from which the bounds are claimed to hold [default: 1000].
    #[arg(long)]
    pub applicable_from: Option<Count>,
    /// Threshold on the centered sum (max-jump-split).
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub samples: Option<Count>,
    #[arg(long)]
    pub chunks: Option<u32>,
    #[arg(long)]
    pub grid_points: Option<usize>,
}

pub fn verify(map: Map<String, Value>, seed: u64) -> CliResult<Outcome> {
    let check: CheckArg = match map.get("check") {
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| CliError::domain(format!("invalid check: {e}")))?,
        None => return Err(CliError::domain("missing required parameter: check")),
    };
    let mc = ["samples", "chunks", "grid_points"];
    let mut allowed = vec!["check", "epsilon", "q", "sigma2"];
    match check {
        CheckArg::Interpolation => allowed.push("C"),
        CheckArg::Pi0 => allowed.extend(["C", "t", "n"].iter().chain(&mc)),
        CheckArg::Bounds => allowed.extend(
            ["C", "n", "m", "u_fractions", "delta", "applicable_from"]
                .iter()
                .chain(&mc),
        ),
        CheckArg::MaxJumpSplit => allowed.extend(["n", "x"].iter().chain(&mc)),
    }
    check_allowed(&map, &allowed, &format!("verify --check {}", tag(&check)))?;
    let mut a: VerifyArgs = decode(map)?;

    if check == CheckArg::Interpolation {
        let params = resolve_rate_params(a.epsilon, &mut a.q, &mut a.sigma2)?;
        let cs = a.c.clone().ok_or_else(|| CliError::domain("missing required parameter: C"))?;
        let rows = check_interpolation(params.epsilon(), params.q(), params.sigma2(), &cs)?;
        let mut table = Table::new(&["C", "J", "gaussian_branch", "scaled", "gap_from_q"]);
        for r in &rows {
            table.push(vec![r.c.into(), r.j.into(), r.gaussian_branch.into(), r.scaled.into(), r.gap_from_q.into()]);
        }
        let crit = params.critical_constants();
        let report = Report::new(&rows, table).note(format!("c_eps: {:?}", crit.c_eps));
        return Ok((present_fields(&a), report));
    }

    let law = resolve_law(a.epsilon, &mut a.q, a.sigma2)?;
    let samples = a.samples.get_or_insert(Count(DEFAULT_SAMPLES)).0;
    let chunks = *a.chunks.get_or_insert(DEFAULT_CHUNKS);
    let grid = *a.grid_points.get_or_insert(DEFAULT_GRID_POINTS);
    let base = base_from(law, samples, seed, chunks, grid);
    let report = match check {
        CheckArg::Pi0 => {
            let c = single(&a.c, "C")?;
            let t = *a.t.get_or_insert(1.0);
            let ns: Vec<u64> = need(a.n.as_ref(), "n")?.iter().map(|c| c.0).collect();
            sweep_report(&check_pi0_limit(&base, c, t, &ns)?)
        }
        CheckArg::Bounds => {
            let c = single(&a.c, "C")?;
            let n = single(&a.n, "n")?.0;
            let m = a.m.get_or_insert(Count(2)).0;
            let fr = a.u_fractions.get_or_insert_with(|| vec![0.25, 0.5, 1.0]).clone();
            let delta = *a.delta.get_or_insert(DEFAULT_DELTA);
            let from = a.applicable_from.get_or_insert(Count(DEFAULT_APPLICABLE_FROM_N)).0;
            let params = BoundParams::new(delta, from)?;
            let checks = check_bounds(&base, &params, c, n, m, &fr)?;
            let mut table = Table::new(&[
                "event",
                "n",
                "m",
                "u",
                "x_n",
                "bound",
                "log_p_hat",
                "std_err_log",
                "holds",
                "applicable",
            ]);
            for b in &checks {
                table.push(vec![
                    Cell::Text(tag(&b.event)),
                    b.n.into(),
                    b.m.into(),
                    b.u.into(),
                    b.x_n.into(),
                    b.bound.into(),
                    b.estimate.log_p_hat.into(),
                    b.estimate.std_err_log.into(),
                    b.holds.into(),
                    b.applicable.into(),
                ]);
            }
            let all = checks.iter().all(|b| b.holds);
            Report::new(&checks, table).note(format!("all_hold: {all}"))
        }
        CheckArg::MaxJumpSplit => {
            let n = single(&a.n, "n")?.0;
            let x = need(a.x, "x")?;
            let s = max_jump_split(&base, n, x)?;
            let mut table = Table::new(&[
                "n",
                "x",
                "log_p_n",
                "log_r_n",
                "std_err_log_r_n",
                "log_r_lower",
                "log_r_upper",
                "log_p_max",
                "bracketed",
                "jump_dominates",
            ]);
            table.push(vec![
                n.into(),
                x.into(),
                s.log_p_n.log_p_hat.into(),
                s.log_r_n.into(),
                s.std_err_log_r_n.into(),
                s.log_r_lower.into(),
                s.log_r_upper.into(),
                s.exact_max.log_p_max.into(),
                s.bracketed(2.0).into(),
                s.jump_dominates().into(),
            ]);
            Report::new(&s, table)
        }
        CheckArg::Interpolation => unreachable!("handled above"),
    };
    Ok((present_fields(&a), report))
}
