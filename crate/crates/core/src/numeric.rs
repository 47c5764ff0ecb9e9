//! Log-domain arithmetic shared by the estimators.

use statrs::function::gamma::ln_gamma;

/// `log(exp(a) + exp(b))` without overflow; `-inf` is the additive identity.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log(sum(exp(v)))` over a slice. Empty or all `-inf` input gives `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `log(1 - exp(x))` for `x <= 0`.
pub fn log1m_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// `log(n choose m)` through log-Gamma, valid for large `n`.
pub fn log_binomial(n: u64, m: u64) -> f64 {
    assert!(m <= n, "log_binomial: m > n");
    if m == 0 || m == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(m as f64 + 1.0) - ln_gamma((n - m) as f64 + 1.0)
}

/// Streaming first and second moments of `exp(l)` for log-valued samples.
///
/// Sums are kept relative to the running maximum so that samples whose
/// logs differ by hundreds of nats neither overflow nor vanish. Merging two
/// accumulators is exact up to floating point rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogMeanAccumulator {
    shift: f64,
    sum: f64,
    sum_sq: f64,
    count: u64,
}

impl Default for LogMeanAccumulator {
    fn default() -> Self {
        Self {
            shift: f64::NEG_INFINITY,
            sum: 0.0,
            sum_sq: 0.0,
            count: 0,
        }
    }
}

impl LogMeanAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, log_value: f64) {
        self.count += 1;
        if log_value == f64::NEG_INFINITY {
            return;
        }
        if log_value > self.shift {
            self.rescale(log_value);
        }
        let w = (log_value - self.shift).exp();
        self.sum += w;
        self.sum_sq += w * w;
    }

    pub fn merge(&mut self, other: &Self) {
        self.count += other.count;
        if other.shift == f64::NEG_INFINITY {
            return;
        }
        if other.shift > self.shift {
            self.rescale(other.shift);
        }
        let r = (other.shift - self.shift).exp();
        self.sum += other.sum * r;
        self.sum_sq += other.sum_sq * r * r;
    }

    fn rescale(&mut self, new_shift: f64) {
        if self.shift != f64::NEG_INFINITY {
            let r = (self.shift - new_shift).exp();
            self.sum *= r;
            self.sum_sq *= r * r;
        }
        self.shift = new_shift;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// True when every pushed value was zero.
    pub fn all_zero(&self) -> bool {
        self.shift == f64::NEG_INFINITY
    }

    /// Log of the sample mean, `-inf` when all samples were zero.
    pub fn log_mean(&self) -> f64 {
        if self.all_zero() || self.count == 0 {
            return f64::NEG_INFINITY;
        }
        self.shift + (self.sum / self.count as f64).ln()
    }

    /// Delta-method standard error of `log_mean`: `se(mean) / mean`.
    ///
    /// Zero when fewer than two samples were seen or all samples were zero.
    pub fn std_err_log(&self) -> f64 {
        if self.all_zero() || self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let mean = self.sum / n;
        let var = ((self.sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
        (var / n).sqrt() / mean
    }
}
