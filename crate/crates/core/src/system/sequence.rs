//! Nonnegative sequences indexed by `k >= 1` with closed-form or numerically
//! summed tails. Used for the jump constants `L_k` and `γ_k`.

use serde::Serialize;

use super::SystemError;

/// Relative tolerance for numerically summed tails.
pub const TAIL_RELATIVE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sequence {
    /// Every term is zero.
    Zero,
    /// `first * ratio^(k-1)`.
    Geometric { first: f64, ratio: f64 },
    /// `coefficient * k^exponent`.
    Power { coefficient: f64, exponent: f64 },
    /// Listed terms for `k = 1..=len`, zero afterwards.
    Finite { terms: Vec<f64> },
    /// Every term is `+∞`.
    Infinite,
}

impl Sequence {
    pub fn term(&self, k: usize) -> f64 {
        debug_assert!(k >= 1);
        match self {
            Sequence::Zero => 0.0,
            Sequence::Geometric { first, ratio } => {
                if *first == 0.0 {
                    0.0
                } else {
                    first * ratio.powf((k - 1) as f64)
                }
            }
            Sequence::Power { coefficient, exponent } => {
                if *coefficient == 0.0 {
                    0.0
                } else {
                    coefficient * (k as f64).powf(*exponent)
                }
            }
            Sequence::Finite { terms } => terms.get(k - 1).copied().unwrap_or(0.0),
            Sequence::Infinite => f64::INFINITY,
        }
    }

    /// `sup_k term(k)`.
    pub fn sup(&self) -> f64 {
        match self {
            Sequence::Zero => 0.0,
            Sequence::Geometric { first, ratio } => {
                if *first == 0.0 {
                    0.0
                } else if *ratio > 1.0 {
                    f64::INFINITY
                } else {
                    *first
                }
            }
            Sequence::Power { coefficient, exponent } => {
                if *coefficient == 0.0 {
                    0.0
                } else if *exponent > 0.0 {
                    f64::INFINITY
                } else {
                    *coefficient
                }
            }
            Sequence::Finite { terms } => terms.iter().copied().fold(0.0, f64::max),
            Sequence::Infinite => f64::INFINITY,
        }
    }

    /// `Σ_{m >= k} term(m)`; `+∞` when the series diverges.
    pub fn tail(&self, k: usize) -> f64 {
        let k = k.max(1);
        match self {
            Sequence::Zero => 0.0,
            Sequence::Geometric { first, ratio } => {
                if *first == 0.0 {
                    0.0
                } else if *ratio >= 1.0 {
                    f64::INFINITY
                } else {
                    self.term(k) / (1.0 - ratio)
                }
            }
            Sequence::Power { coefficient, exponent } => {
                if *coefficient == 0.0 {
                    0.0
                } else if *exponent >= -1.0 {
                    f64::INFINITY
                } else {
                    coefficient * power_tail(k, *exponent)
                }
            }
            Sequence::Finite { terms } => terms.iter().skip(k - 1).sum(),
            Sequence::Infinite => f64::INFINITY,
        }
    }

    pub fn sum(&self) -> f64 {
        self.tail(1)
    }

    /// `Σ_{m=1}^{n} term(m)`.
    pub fn partial_sum(&self, n: usize) -> f64 {
        match self {
            Sequence::Geometric { first, ratio } if *ratio != 1.0 => {
                first * (1.0 - ratio.powf(n as f64)) / (1.0 - ratio)
            }
            _ => (1..=n).map(|k| self.term(k)).sum(),
        }
    }

    pub fn is_summable(&self) -> bool {
        self.sum().is_finite()
    }
}

/// `Σ_{m >= k} m^p` for `p < -1`: direct summation over a block, then an
/// Euler–Maclaurin remainder. The neglected terms are `O(M^(p-3))`, far below
/// the relative tolerance for the block length used.
fn power_tail(k: usize, p: f64) -> f64 {
    let block = 2000usize;
    let m_end = k + block;
    let head: f64 = (k..m_end).map(|m| (m as f64).powf(p)).sum();
    let m = m_end as f64;
    let remainder = m.powf(p + 1.0) / (-p - 1.0) + 0.5 * m.powf(p) - p * m.powf(p - 1.0) / 12.0;
    head + remainder
}

/// `N_ε = inf{k >= 1 : Σ_{m>=k} γ_m < ε}`.
pub fn n_epsilon(gamma: &Sequence, eps: f64) -> Result<usize, SystemError> {
    if !(eps > 0.0) {
        return Err(SystemError::NeverReached { eps });
    }
    if !gamma.is_summable() {
        return Err(SystemError::DivergentTail);
    }
    if gamma.tail(1) < eps {
        return Ok(1);
    }
    // Tails are nonincreasing in k: bracket by doubling, then bisect.
    let mut lo = 1usize;
    let mut hi = 2usize;
    while gamma.tail(hi) >= eps {
        lo = hi;
        hi = hi.checked_mul(2).ok_or(SystemError::DivergentTail)?;
        if hi > (1usize << 60) {
            return Err(SystemError::DivergentTail);
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if gamma.tail(mid) < eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
