//! Small Monte Carlo summaries.

use serde::{Deserialize, Serialize};

/// Normal quantile for a two-sided 95% interval.
pub const Z95: f64 = 1.959_963_984_540_054;

/// An empirical frequency with its normal-approximation half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub hits: u64,
    pub trials: u64,
    pub rate: f64,
    pub half_width: f64,
}

impl Rate {
    pub fn new(hits: u64, trials: u64) -> Self {
        let rate = if trials == 0 {
            0.0
        } else {
            hits as f64 / trials as f64
        };
        Self {
            hits,
            trials,
            rate,
            half_width: Z95 * Self::sd(rate, trials),
        }
    }

    fn sd(rate: f64, trials: u64) -> f64 {
        if trials == 0 {
            0.0
        } else {
            (rate * (1.0 - rate) / trials as f64).sqrt()
        }
    }

    /// Standard error of the rate.
    pub fn std_error(&self) -> f64 {
        Self::sd(self.rate, self.trials)
    }
}

/// Running mean and variance (Welford).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Integer square root.
pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// `sign(v)` with `sign(0) = -1`.
pub fn sign_or_minus(v: i64) -> i8 {
    if v > 0 {
        1
    } else {
        -1
    }
}
