//! Closed-form stability test for scalar linear switching systems with the
//! power Lyapunov function `γ y |x|^β`.

use serde::Serialize;

use super::LyapunovError;
use crate::json;
use crate::markov::{GeneratorMatrix, MarkChain};
use crate::system::{CoefficientFamily, CoefficientKind, JumpFamily, ScheduledJump, SystemSpec};

/// How ε is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonChoice {
    Fixed(f64),
    /// Largest ε on a log grid over `[1e-6, 1e2]` (10 points per decade)
    /// satisfying `a_i - b_i²/2 < -ε` for every regime.
    Search,
}

/// Candidate ε values for [`EpsilonChoice::Search`], descending.
pub fn epsilon_search_grid() -> Vec<f64> {
    (0..=80).rev().map(|i| 10f64.powf(-6.0 + i as f64 / 10.0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeRow {
    /// 1-based regime number.
    pub regime: usize,
    pub a: f64,
    pub b: f64,
    /// `a_i - b_i² / 2`
    pub margin: f64,
    /// `Σ_{j>i} (j - i) q̃_ij`
    pub switching_sum: f64,
    /// `i (β ε + 2) / 2`
    pub rhs: f64,
    /// `margin < -ε`
    pub pass_margin: bool,
    /// `switching_sum < rhs`
    pub pass_switching: bool,
    /// `a_i < rhs`
    pub pass_drift: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeConditions {
    pub epsilon: f64,
    /// False when search mode found no admissible ε; `epsilon` is then the
    /// smallest grid value.
    pub epsilon_found: bool,
    pub b_max: f64,
    pub beta: f64,
    pub rows: Vec<RegimeRow>,
}

impl RegimeConditions {
    pub fn pass_margin(&self) -> bool {
        self.rows.iter().all(|r| r.pass_margin)
    }
    pub fn pass_switching(&self) -> bool {
        self.rows.iter().all(|r| r.pass_switching)
    }
    pub fn pass_drift(&self) -> bool {
        self.rows.iter().all(|r| r.pass_drift)
    }
}

fn linear_coefficients(f: &CoefficientFamily, what: &str) -> Result<Vec<f64>, LyapunovError> {
    if f.kind() != CoefficientKind::Linear {
        return Err(LyapunovError::InvalidParameter(format!("{what} must be linear in x")));
    }
    Ok(f.coefficients().to_vec())
}

/// Per-regime margin, exponent and right-hand-side checks.
pub fn regime_conditions(
    drift: &CoefficientFamily,
    diffusion: &CoefficientFamily,
    gen: &GeneratorMatrix,
    eps: EpsilonChoice,
) -> Result<RegimeConditions, LyapunovError> {
    let a = linear_coefficients(drift, "drift")?;
    let b = linear_coefficients(diffusion, "diffusion")?;
    let n = gen.n_states();
    if a.len() != n || b.len() != n {
        return Err(LyapunovError::InvalidParameter(format!(
            "expected {n} drift and diffusion coefficients, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if let Some(i) = b.iter().position(|&v| v == 0.0) {
        return Err(LyapunovError::ZeroDiffusion { regime: i + 1 });
    }
    let margins: Vec<f64> = a.iter().zip(&b).map(|(a, b)| a - b * b / 2.0).collect();
    let (epsilon, epsilon_found) = match eps {
        EpsilonChoice::Fixed(e) => {
            if !(e.is_finite() && e > 0.0) {
                return Err(LyapunovError::InvalidParameter(format!("epsilon must be positive, got {e}")));
            }
            (e, true)
        }
        EpsilonChoice::Search => {
            let grid = epsilon_search_grid();
            match grid.iter().find(|&&e| margins.iter().all(|m| *m < -e)) {
                Some(&e) => (e, true),
                None => (*grid.last().expect("nonempty grid"), false),
            }
        }
    };
    let b_max = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let beta = epsilon / (b_max * b_max);
    let rows = (0..n)
        .map(|i| {
            let number = (i + 1) as f64;
            let switching_sum: f64 = (i + 1..n).map(|j| (j - i) as f64 * gen.rate(i, j)).sum();
            let rhs = number * (beta * epsilon + 2.0) / 2.0;
            RegimeRow {
                regime: i + 1,
                a: a[i],
                b: b[i],
                margin: margins[i],
                switching_sum,
                rhs,
                pass_margin: margins[i] < -epsilon,
                pass_switching: switching_sum < rhs,
                pass_drift: a[i] < rhs,
            }
        })
        .collect();
    Ok(RegimeConditions { epsilon, epsilon_found, b_max, beta, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    /// Schedule index.
    pub k: usize,
    /// 1-based mark state the transition starts from.
    pub h: usize,
    #[serde(serialize_with = "json::float")]
    pub x: f64,
    /// `Σ_z P(h, z) |x + g(k, z, x)|^β / |x|^β`
    #[serde(serialize_with = "json::float")]
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition47Report {
    pub pass: bool,
    /// Largest ratio found; the condition requires it to be at most 2.
    #[serde(serialize_with = "json::float")]
    pub max_ratio: f64,
    /// Natural log of `max_ratio`, finite even when the ratio overflows.
    pub log_max_ratio: f64,
    /// Point attaining `max_ratio`.
    pub witness: Option<Witness>,
    pub jumps_checked: usize,
    pub grid_points: usize,
}

/// `x` grid of `n` points log-spaced on `[lo, hi]`, with both signs.
pub fn symmetric_log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let (a, b) = (lo.ln(), hi.ln());
    let pos: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
    pos.iter().map(|v| -v).rev().chain(pos.iter().copied()).collect()
}

/// Default grid for the jump-moment condition: 61 magnitudes on `[1e-3, 1e3]`.
pub fn default_x_grid() -> Vec<f64> {
    symmetric_log_grid(1e-3, 1e3, 61)
}

/// Checks `Σ_z P_k(h, z) ‖x + g(k, z, x)‖^β <= 2 ‖x‖^β` for every listed jump,
/// every starting mark `h` and every grid point (taken along the first axis
/// in `dim` dimensions).
pub fn check_condition_47(
    jump: &JumpFamily,
    eta: &MarkChain,
    beta: f64,
    jumps: &[ScheduledJump],
    x_grid: &[f64],
    dim: usize,
) -> Result<Condition47Report, LyapunovError> {
    let grid: Vec<f64> = x_grid.iter().copied().filter(|v| *v != 0.0 && v.is_finite()).collect();
    if grid.is_empty() {
        return Err(LyapunovError::EmptyGrid);
    }
    if !(beta > 0.0) {
        return Err(LyapunovError::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    let mut best: Option<(f64, Witness)> = None;
    let mut x = vec![0.0; dim.max(1)];
    for j in jumps {
        let p = eta.transition().at_step(j.step);
        for (h, row) in p.iter().enumerate() {
            for &r in &grid {
                x[0] = r;
                let terms: Vec<f64> = row
                    .iter()
                    .enumerate()
                    .filter(|(_, &pz)| pz > 0.0)
                    .map(|(z, &pz)| pz.ln() + beta * jump.post_jump_log_norm(j.index, eta.value(z), &x))
                    .collect();
                let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lse = m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln();
                let log_ratio = lse - beta * r.abs().ln();
                if best.as_ref().is_none_or(|(b, _)| log_ratio > *b) {
                    best = Some((log_ratio, Witness { k: j.index, h: h + 1, x: r, ratio: log_ratio.exp() }));
                }
            }
        }
    }
    let (log_max_ratio, witness) = match best {
        Some((l, w)) => (l, Some(w)),
        None => (0.0, None),
    };
    // Relative slack for rounding in the log-sum-exp.
    let pass = log_max_ratio <= 2f64.ln() + 1e-12;
    Ok(Condition47Report {
        pass,
        max_ratio: log_max_ratio.exp(),
        log_max_ratio,
        witness,
        jumps_checked: jumps.len(),
        grid_points: grid.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem6Report {
    #[serde(flatten)]
    pub conditions: RegimeConditions,
    pub pass_margin: bool,
    pub pass_switching: bool,
    pub pass_drift: bool,
    pub condition_47: Condition47Report,
    pub pass: bool,
}

/// Full test on a system: margins, exponent, both readings of the regime
/// inequality, and the jump-moment condition over the truncated schedule.
pub fn theorem6_check(
    spec: &SystemSpec,
    eps: EpsilonChoice,
    x_grid: &[f64],
) -> Result<Theorem6Report, LyapunovError> {
    let conditions = regime_conditions(spec.drift(), spec.diffusion(), spec.xi(), eps)?;
    let condition_47 =
        check_condition_47(spec.jump(), spec.eta(), conditions.beta, spec.schedule().jumps(), x_grid, spec.dim())?;
    let pass_margin = conditions.pass_margin();
    let pass_switching = conditions.pass_switching();
    let pass_drift = conditions.pass_drift();
    let pass = conditions.epsilon_found && pass_margin && pass_switching && pass_drift && condition_47.pass;
    Ok(Theorem6Report { conditions, pass_margin, pass_switching, pass_drift, condition_47, pass })
}
