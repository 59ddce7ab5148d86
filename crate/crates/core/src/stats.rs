//! Streaming moments and confidence intervals for Monte Carlo estimates.

use serde::Serialize;

use crate::json;

/// z-value of a two-sided 95% normal interval.
pub const Z95: f64 = 1.96;

/// Welford's online mean and variance.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, v: f64) {
        self.n += 1;
        let d = v - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (v - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            f64::NAN
        } else {
            self.mean
        }
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            f64::NAN
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    pub fn estimate(&self) -> Estimate {
        Estimate::new(self.mean(), self.stderr(), self.n)
    }
}

impl FromIterator<f64> for Welford {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut w = Welford::new();
        iter.into_iter().for_each(|v| w.push(v));
        w
    }
}

/// Sample mean with standard error and 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    #[serde(serialize_with = "json::float")]
    pub mean: f64,
    #[serde(serialize_with = "json::float")]
    pub stderr: f64,
    #[serde(serialize_with = "json::float")]
    pub ci_low: f64,
    #[serde(serialize_with = "json::float")]
    pub ci_high: f64,
    pub n: u64,
}

impl Estimate {
    pub fn new(mean: f64, stderr: f64, n: u64) -> Self {
        Estimate { mean, stderr, ci_low: mean - Z95 * stderr, ci_high: mean + Z95 * stderr, n }
    }

    pub fn exact(value: f64) -> Self {
        Self::new(value, 0.0, 1)
    }

    /// Bernoulli proportion with its binomial standard error.
    pub fn proportion(successes: u64, n: u64) -> Self {
        if n == 0 {
            return Self::new(f64::NAN, f64::NAN, 0);
        }
        let p = successes as f64 / n as f64;
        Self::new(p, (p * (1.0 - p) / n as f64).sqrt(), n)
    }
}

/// Median with `+∞` ordered last and NaN ignored; NaN for an empty slice.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        let (a, b) = (v[n / 2 - 1], v[n / 2]);
        if a == b {
            a
        } else {
            a / 2.0 + b / 2.0
        }
    }
}
