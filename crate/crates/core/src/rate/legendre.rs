use serde::Serialize;

use crate::error::{Error, Result};

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const SEARCH_TOL: f64 = 1e-10;
const MAX_DOUBLINGS: usize = 20;
const CONVEXITY_SAMPLES: usize = 65;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LegendreResult {
    pub value: f64,
    /// Maximizing `lambda`.
    pub argmax: f64,
    /// Search bound after adaptive doubling.
    pub lambda_max: f64,
    /// The sampled `Lambda` was not convex and nondecreasing.
    pub nonconvex: bool,
    /// The maximizer still sat on the search boundary after all doublings.
    pub boundary_hit: bool,
}

/// `sup { lambda t - cgf(lambda) : 0 <= lambda <= lambda_max }`.
///
/// Golden-section search; if the maximizer lands on `lambda_max` the bound
/// is doubled, at most 20 times. Shape violations of `cgf` are reported in
/// the result rather than rejected.
pub fn legendre<F: Fn(f64) -> f64>(lambda_max: f64, cgf: F, t: f64) -> Result<LegendreResult> {
    if !(lambda_max > 0.0 && lambda_max.is_finite()) {
        return Err(Error::domain(format!("lambda_max must be positive, got {lambda_max}")));
    }
    if !t.is_finite() {
        return Err(Error::domain(format!("t must be finite, got {t}")));
    }
    let at_zero = cgf(0.0);
    if at_zero.abs() > 1e-12 {
        return Err(Error::domain(format!("cgf(0) must be 0, got {at_zero}")));
    }

    let mut bound = lambda_max;
    let mut nonconvex = !shape_ok(&cgf, bound);
    let objective = |l: f64| l * t - cgf(l);

    if t <= 0.0 && !nonconvex {
        // lambda t - cgf(lambda) <= 0 with equality at zero.
        return Ok(LegendreResult {
            value: 0.0,
            argmax: 0.0,
            lambda_max: bound,
            nonconvex,
            boundary_hit: false,
        });
    }

    let mut doublings = 0;
    loop {
        let argmax = golden_max(&objective, 0.0, bound);
        let at_boundary = bound - argmax <= 1e-6 * bound;
        if !at_boundary || doublings == MAX_DOUBLINGS {
            let (argmax, value) = if objective(argmax) >= 0.0 {
                (argmax, objective(argmax))
            } else {
                (0.0, 0.0)
            };
            return Ok(LegendreResult {
                value,
                argmax,
                lambda_max: bound,
                nonconvex,
                boundary_hit: at_boundary,
            });
        }
        bound *= 2.0;
        doublings += 1;
        nonconvex |= !shape_ok(&cgf, bound);
    }
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > SEARCH_TOL * (1.0 + a.abs().max(b.abs())) {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = f(x1);
        }
    }
    let mid = 0.5 * (a + b);
    // Endpoints matter when the maximum sits on the boundary.
    [a, mid, b]
        .into_iter()
        .max_by(|x, y| f(*x).total_cmp(&f(*y)))
        .expect("three candidates")
}

/// Convex and nondecreasing on a uniform sample of `[0, bound]`.
fn shape_ok<F: Fn(f64) -> f64>(cgf: &F, bound: f64) -> bool {
    let h = bound / (CONVEXITY_SAMPLES - 1) as f64;
    let v: Vec<f64> = (0..CONVEXITY_SAMPLES).map(|i| cgf(i as f64 * h)).collect();
    let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-9 * scale;
    let monotone = v.windows(2).all(|w| w[1] >= w[0] - tol);
    let convex = v.windows(3).all(|w| w[0] + w[2] - 2.0 * w[1] >= -tol);
    monotone && convex
}
