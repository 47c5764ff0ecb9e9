use serde::Serialize;

use crate::error::{Error, Result};

/// A rate function sampled on a uniform grid.
///
/// `+inf` is stored as `f64::INFINITY`, never a large finite stand-in.
/// Outside `[t_min, t_max]` the function takes the constant values `below`
/// and `above`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateGrid {
    t_min: f64,
    step: f64,
    values: Vec<f64>,
    below: f64,
    above: f64,
}

impl RateGrid {
    pub fn new(t_min: f64, step: f64, values: Vec<f64>, below: f64, above: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::domain("a rate grid needs at least two values"));
        }
        if !(step > 0.0 && step.is_finite() && t_min.is_finite()) {
            return Err(Error::domain(format!("invalid grid: t_min = {t_min}, step = {step}")));
        }
        if values.iter().chain([&below, &above]).any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::domain("rate values must be nonnegative (possibly +inf)"));
        }
        Ok(Self { t_min, step, values, below, above })
    }

    /// Samples `f` at `points` nodes spanning `[t_min, t_max]`.
    pub fn from_fn(t_min: f64, t_max: f64, points: usize, f: impl Fn(f64) -> f64, below: f64, above: f64) -> Result<Self> {
        if !(t_max > t_min) || points < 2 {
            return Err(Error::domain("grid needs t_max > t_min and at least two points"));
        }
        let step = (t_max - t_min) / (points - 1) as f64;
        let values = (0..points).map(|i| f(node(t_min, t_max, step, points, i))).collect();
        Self::new(t_min, step, values, below, above)
    }

    /// Rate of the normalized big jump at the transition:
    /// `0` for `a < 0`, `q a^(1-eps) / C^(1+eps)` on `[0, 1]`, `+inf` above 1.
    pub fn jump_rate(epsilon: f64, q: f64, c: f64, points: usize) -> Result<Self> {
        let k = q / c.powf(1.0 + epsilon);
        Self::from_fn(0.0, 1.0, points, |a| k * a.powf(1.0 - epsilon), 0.0, f64::INFINITY)
    }

    /// Gaussian rate `b^2 / (2 sigma2)` for `b > 0`, zero for `b <= 0`, on
    /// `[b_min, b_max]` and `+inf` beyond `b_max`.
    pub fn gaussian_rate(sigma2: f64, b_min: f64, b_max: f64, points: usize) -> Result<Self> {
        let below = 0.0;
        Self::from_fn(
            b_min,
            b_max,
            points,
            |b| if b > 0.0 { b * b / (2.0 * sigma2) } else { 0.0 },
            below,
            f64::INFINITY,
        )
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }
    pub fn t_max(&self) -> f64 {
        self.t_min + self.step * (self.values.len() - 1) as f64
    }
    pub fn step(&self) -> f64 {
        self.step
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn node(&self, i: usize) -> f64 {
        node(self.t_min, self.t_max(), self.step, self.values.len(), i)
    }

    /// Linear interpolation; a cell touching `+inf` is `+inf` except at its
    /// finite node.
    pub fn value_at(&self, t: f64) -> f64 {
        if t < self.t_min {
            return self.below;
        }
        let last = self.values.len() - 1;
        let pos = (t - self.t_min) / self.step;
        if pos > last as f64 {
            // Tolerate rounding right at the top node.
            return if pos - last as f64 <= 1e-9 { self.values[last] } else { self.above };
        }
        let i = (pos.floor() as usize).min(last - 1);
        let w = pos - i as f64;
        let (a, b) = (self.values[i], self.values[i + 1]);
        if w <= 0.0 {
            return a;
        }
        if w >= 1.0 {
            return b;
        }
        if a.is_infinite() || b.is_infinite() {
            return f64::INFINITY;
        }
        a + w * (b - a)
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0])
    }
}

fn node(t_min: f64, t_max: f64, step: f64, points: usize, i: usize) -> f64 {
    if i + 1 == points {
        t_max
    } else {
        t_min + step * i as f64
    }
}

/// `inf { I1(a) + I2(t - a) }` with `a` ranging over the nodes of `first`.
///
/// The grids must cover the section `a + b = t` where the infimum lives;
/// discretization error is at most one grid step times the local Lipschitz
/// constant. Tail hypotheses on the pair are the caller's responsibility.
/// Returns `+inf` when every decomposition is infinite.
pub fn inf_convolution(first: &RateGrid, second: &RateGrid, t: f64) -> f64 {
    (0..first.values.len())
        .map(|i| {
            let a = first.node(i);
            let v = first.values[i];
            if v.is_infinite() {
                f64::INFINITY
            } else {
                v + second.value_at(t - a)
            }
        })
        .fold(f64::INFINITY, f64::min)
}
