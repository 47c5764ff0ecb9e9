//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p semiexp-cli --test acceptance`; append
//! `-- 7 9` to run selected criteria. The process exits nonzero if any
//! criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use semiexp::rate::{inf_convolution, legendre, RateGrid};
use semiexp::simulate::{draw_samples, estimate_decomposition, estimate_naive, max_jump_exact};
use semiexp::verify::{check_bounds, classify_trend, sweep};
use semiexp::{
    BoundParams, MMax, RateParams, SampleKind, SimulationConfig, SweepBase, SweepEstimator, Trend, WeibullLikeSpec,
};
use serde_json::Value;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Grid minimum of the transition objective against the bisection solution.
fn c1_rate_oracle() -> Outcome {
    const POINTS: usize = 1_000_000;
    let ts: Vec<f64> = (0..POINTS).map(|i| i as f64 / (POINTS - 1) as f64).collect();
    let t2: Vec<f64> = ts.iter().map(|t| t * t).collect();
    let cs: Vec<f64> = (0..200).map(|i| 10f64.powf(-1.0 + 3.0 * i as f64 / 199.0)).collect();
    let mut worst = 0.0f64;
    let mut configs = 0;
    for eps in [0.3, 0.5, 0.8] {
        let jump: Vec<f64> = ts.iter().map(|t| (1.0 - t).powf(1.0 - eps)).collect();
        for q in [0.5, 1.0, 2.0] {
            for sigma2 in [1.0, 20.0] {
                let p = RateParams::new(eps, q, sigma2).unwrap();
                let b = 1.0 / (2.0 * sigma2);
                for &c in &cs {
                    let a = q / c.powf(1.0 + eps);
                    let grid_min = jump
                        .iter()
                        .zip(&t2)
                        .map(|(j, t)| a * j + b * t)
                        .fold(f64::INFINITY, f64::min);
                    let j = p.rate_transition(c).unwrap().j;
                    worst = worst.max((j - grid_min).abs());
                    configs += 1;
                }
            }
        }
    }
    outcome(worst <= 1e-8, format!("{configs} configs, max |J - grid min| = {worst:.2e}"))
}

fn c2_critical_identities() -> Outcome {
    let mut worst_t = 0.0f64;
    let mut worst_j = 0.0f64;
    for eps in [0.1, 0.3, 0.5, 0.8, 0.95] {
        for (q, sigma2) in [(1.0, 1.0), (0.5, 20.0), (2.0, 3.0)] {
            let p = RateParams::new(eps, q, sigma2).unwrap();
            let c_eps = p.critical_constants().c_eps;
            let t = p.solve_t(c_eps).unwrap();
            worst_t = worst_t.max((t - (1.0 - eps) / (1.0 + eps)).abs());
            worst_j = worst_j.max((p.objective(c_eps, t) - p.gaussian_rate()).abs());
        }
    }
    outcome(
        worst_t <= 1e-10 && worst_j <= 1e-9,
        format!("max |t(C_eps) - (1-eps)/(1+eps)| = {worst_t:.2e}, max branch gap = {worst_j:.2e}"),
    )
}

fn c3_interpolation_endpoints() -> Outcome {
    let mut exact = true;
    let mut worst = 0.0f64;
    for eps in [0.3, 0.5, 0.8] {
        for (q, sigma2) in [(1.0, 1.0), (0.5, 20.0), (2.0, 20.0)] {
            let p = RateParams::new(eps, q, sigma2).unwrap();
            let c_eps = p.critical_constants().c_eps;
            for f in [0.01, 0.3, 0.9, 1.0] {
                exact &= p.rate_transition(f * c_eps).unwrap().j == 1.0 / (2.0 * sigma2);
            }
            let c = 1e3;
            let j = p.rate_transition(c).unwrap().j;
            worst = worst.max(rel(c.powf(1.0 + eps) * j, q));
        }
    }
    outcome(
        exact && worst <= 1e-2,
        format!("gaussian branch exact: {exact}, max |C^(1+eps) J - q| / q at C = 1e3: {worst:.2e}"),
    )
}

fn c4_contraction() -> Outcome {
    const POINTS: usize = 100_000;
    let p = RateParams::new(0.5, 1.0, 1.0).unwrap();
    let i2 = RateGrid::gaussian_rate(1.0, -1.0, 2.0, 3 * POINTS).unwrap();
    let mut worst = 0.0f64;
    for i in 0..20 {
        let c = 10f64.powf(-0.5 + 1.5 * i as f64 / 19.0);
        let i1 = RateGrid::jump_rate(0.5, 1.0, c, POINTS).unwrap();
        let v = inf_convolution(&i1, &i2, 1.0);
        worst = worst.max((v - p.rate_transition(c).unwrap().j).abs());
    }
    outcome(worst <= 1e-4, format!("20 values of C, max |inf-convolution - J| = {worst:.2e}"))
}

fn c5_legendre() -> Outcome {
    let mut worst = 0.0f64;
    for sigma2 in [1.0, 20.0] {
        for i in 0..=100 {
            let t = 5.0 * i as f64 / 100.0;
            let r = legendre(1.0, |l| sigma2 * l * l / 2.0, t).unwrap();
            worst = worst.max((r.value - t * t / (2.0 * sigma2)).abs());
        }
    }
    outcome(worst <= 1e-8, format!("t in [0,5], max error {worst:.2e}"))
}

fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

fn c6_sampler() -> Outcome {
    const N: usize = 1_000_000;
    let law = WeibullLikeSpec::new(1.0, 0.5).unwrap();
    let raw = draw_samples(&law, SampleKind::Raw, N, 11).unwrap();
    let ks_raw = ks_statistic(raw.clone(), |x| -law.log_survival_raw(x).unwrap().exp_m1());
    let a = 9.0;
    let log_a = law.log_survival_raw(a).unwrap();
    let cond = draw_samples(&law, SampleKind::Conditional { a }, N, 12).unwrap();
    let ks_cond = ks_statistic(cond, |x| -(law.log_survival_raw(x).unwrap() - log_a).exp_m1());

    let n = N as f64;
    let mean = raw.iter().sum::<f64>() / n;
    let m2 = raw.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = raw.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let z_mean = (mean - law.mu()) / (m2 / n).sqrt();
    let z_var = (m2 - law.sigma2()) / ((m4 - m2 * m2) / n).sqrt();
    outcome(
        ks_raw < 0.002 && ks_cond < 0.002 && z_mean.abs() <= 4.0 && z_var.abs() <= 4.0,
        format!("KS raw {ks_raw:.5}, KS conditional {ks_cond:.5}, mean z {z_mean:.2}, variance z {z_var:.2}"),
    )
}

fn c7_decomposition_identity() -> Outcome {
    let law = WeibullLikeSpec::new(1.0, 0.5).unwrap();
    let cfg = SimulationConfig::new(law, 10, 45.0, 1_000_000, 7).unwrap();
    let d = estimate_decomposition(&cfg, MMax::Fixed(10)).unwrap();
    let naive = estimate_naive(&cfg).unwrap();
    let (lo, hi) = d.record.interval95();
    let (nlo, nhi) = naive.interval95();
    outcome(
        d.record.overlaps95(&naive),
        format!(
            "n = 10, x = 45: decomposition [{lo:.4}, {hi:.4}], naive [{nlo:.4}, {nhi:.4}] (p ~ {:.2e})",
            naive.log_p_hat.exp()
        ),
    )
}

fn c8_variance_reduction() -> Outcome {
    let law = WeibullLikeSpec::new(1.0, 0.5).unwrap();
    let (n, x) = (50, 150.0);
    let cfg = SimulationConfig::new(law, n, x, 1_000_000, 8).unwrap();
    let naive = estimate_naive(&cfg).unwrap();
    let tilted = estimate_decomposition(&cfg.clone().with_cutoff(x / 2.0).unwrap(), MMax::Auto).unwrap();
    let ratio = tilted.record.std_err_log / naive.std_err_log;
    outcome(
        ratio <= 0.2 && !naive.zero_hits,
        format!(
            "p ~ {:.2e}: naive SE {:.4}, tilted SE {:.5}, ratio {ratio:.3}",
            naive.log_p_hat.exp(),
            naive.std_err_log,
            tilted.record.std_err_log
        ),
    )
}

fn c9_transition_trend() -> Outcome {
    // Unit variance with the same J: q / C^(1+eps) is held fixed.
    let law = WeibullLikeSpec::with_variance(0.5, 1.0).unwrap();
    let c = 2.0 * law.q().powf(1.0 / 1.5);
    let regime = RateParams::from(&law).transition_regime(c).unwrap();
    let mut rows = Vec::new();
    for (n, samples) in [(100, 200_000), (1000, 50_000), (10_000, 20_000)] {
        let base = SweepBase::new(law, samples, 9);
        rows.extend(sweep(&base, &regime, &[n], SweepEstimator::Decomposition).unwrap().rows);
    }
    let trend = classify_trend(&rows, regime.limit);
    let last = rows.last().unwrap().normalized;
    let gap = rel(last, regime.limit);
    let values: Vec<String> = rows.iter().map(|r| format!("{:.4}", r.normalized)).collect();
    outcome(
        trend != Trend::NonMonotone && gap <= 0.25,
        format!(
            "normalized [{}] -> {:.6}, trend {trend:?}, final gap {:.1}%",
            values.join(", "),
            regime.limit,
            100.0 * gap
        ),
    )
}

fn c10_max_jump() -> Outcome {
    let law = WeibullLikeSpec::new(1.0, 0.5).unwrap();
    let mut sandwich = true;
    for n in [1u64, 2, 10, 1000, 100_000] {
        for x in [0.0, 5.0, 50.0, 300.0, 2000.0] {
            let r = max_jump_exact(&law, n, x).unwrap();
            let s = law.log_survival_centered(x).exp();
            let upper = n as f64 * s;
            let pairs = (n * n.saturating_sub(1)) as f64 / 2.0;
            let lower = upper - pairs * s * s;
            sandwich &= r.p_max <= upper * (1.0 + 1e-12) && r.p_max >= lower * (1.0 - 1e-12);
        }
    }
    // Centered level with per-summand tail mass 1e-12.
    let k = 1.0 - law.epsilon();
    let x_n = (1e-12f64.ln() / -law.q()).powf(1.0 / k) - law.mu();
    let speed = x_n.powf(k);
    let mut literal = Vec::new();
    let mut ok = sandwich;
    for n in [1u64, 2, 3] {
        let v = max_jump_exact(&law, n, x_n).unwrap().log_p_max / speed;
        ok &= rel(v, -law.q()) <= 0.05;
        literal.push(format!("n={n}: {v:.4}"));
    }
    let mut corrected = Vec::new();
    for n in [100u64, 10_000] {
        let v = (max_jump_exact(&law, n, x_n).unwrap().log_p_max - (n as f64).ln()) / speed;
        ok &= rel(v, -law.q()) <= 0.05;
        corrected.push(format!("n={n}: {v:.4}"));
    }
    outcome(
        ok,
        format!(
            "sandwich {sandwich}; x^-(1-eps) log p_max [{}]; with log n removed [{}]",
            literal.join(", "),
            corrected.join(", ")
        ),
    )
}

fn c11_bounds() -> Outcome {
    let law = WeibullLikeSpec::new(1.0, 0.5).unwrap();
    let base = SweepBase::new(law, 10_000, 11);
    let params = BoundParams::new(0.15, 1000).unwrap();
    let checks = check_bounds(&base, &params, 2.0, 10_000, 2, &[0.25, 0.5, 1.0]).unwrap();
    let ok = checks.iter().all(|c| c.holds && c.applicable);
    let worst = checks
        .iter()
        .map(|c| c.estimate.log_p_hat - 2.0 * c.estimate.std_err_log - c.bound)
        .fold(f64::NEG_INFINITY, f64::max);
    outcome(
        ok,
        format!("{} checks at n = 1e4, max (estimate - 2 SE - bound) = {worst:.3}", checks.len()),
    )
}

fn cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_semiexp")).args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn c12_determinism() -> Outcome {
    let runs: [&[&str]; 6] = [
        &["rate", "--epsilon", "0.5", "--C", "0.5,2,10"],
        &["regimes", "--epsilon", "0.3", "--alpha", "0.55,0.7,0.9", "--format", "csv"],
        &["sample", "--epsilon", "0.5", "--count", "1000", "--kind", "tilted", "--cutoff", "6", "--lambda", "0.4"],
        &["simulate", "--epsilon", "0.5", "--n", "20", "--x", "60", "--samples", "5e4", "--format", "csv"],
        &["sweep", "--regime", "transition", "--C", "2", "--epsilon", "0.5", "--n", "100,1000", "--samples", "1e4", "--seed", "42", "--format", "csv"],
        &["verify", "--check", "max-jump-split", "--epsilon", "0.5", "--n", "20", "--x", "60", "--samples", "1e4"],
    ];
    let mut identical = true;
    for args in runs {
        let with = [args, &["--threads", "1"]].concat();
        identical &= cli(&with) == cli(&with);
    }
    let sim = ["simulate", "--epsilon", "0.5", "--n", "20", "--x", "60", "--samples", "5e4"];
    let estimate = |threads: &str| -> (f64, f64) {
        let v: Value = serde_json::from_slice(&cli(&[&sim[..], &["--threads", threads]].concat())).unwrap();
        let r = &v["results"]["record"];
        (r["log_p_hat"].as_f64().unwrap(), r["std_err_log"].as_f64().unwrap())
    };
    let (p1, se1) = estimate("1");
    let mut consistent = true;
    let mut worst = 0.0f64;
    for threads in ["2", "4"] {
        let (p, se) = estimate(threads);
        let z = (p - p1).abs() / (se * se + se1 * se1).sqrt().max(f64::MIN_POSITIVE);
        worst = worst.max(z);
        consistent &= z <= 4.0;
    }
    outcome(
        identical && consistent,
        format!("{} commands byte-identical: {identical}; max z across thread counts {worst:.2}", runs.len()),
    )
}

fn main() {
    type Criterion = (u32, &'static str, Duration, fn() -> Outcome);
    let minute = Duration::from_secs(60);
    let criteria: [Criterion; 12] = [
        (1, "rate-function oracle", Duration::from_secs(30), c1_rate_oracle),
        (2, "critical identities", minute, c2_critical_identities),
        (3, "interpolation endpoints", minute, c3_interpolation_endpoints),
        (4, "contraction consistency", Duration::from_secs(10), c4_contraction),
        (5, "legendre check", minute, c5_legendre),
        (6, "sampler fidelity", minute, c6_sampler),
        (7, "decomposition identity", 2 * minute, c7_decomposition_identity),
        (8, "variance reduction", 2 * minute, c8_variance_reduction),
        (9, "transition-limit trend", 10 * minute, c9_transition_trend),
        (10, "max-jump regime", minute, c10_max_jump),
        (11, "analytic bounds dominate", 5 * minute, c11_bounds),
        (12, "determinism", minute, c12_determinism),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    // Optional criterion numbers restrict the run, e.g. `-- 7 9`.
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for (id, name, limit, run) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let pass = result.pass && elapsed <= limit;
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {id:>2} {}: {name}: {} ({:.1}s of {}s)",
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
