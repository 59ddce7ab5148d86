//! Closed-form growth and Lipschitz constants, and the existence-condition
//! checks built on them.
//!
//! All of `C`, `L` and `L_k` are in squared form: they bound squared norms,
//! e.g. `‖a‖² + ‖b‖² + ‖g‖² <= C (1 + ‖x‖²)`.

use serde::Serialize;

use super::sequence::{n_epsilon, Sequence};
use super::{SystemError, SystemSpec};
use crate::json;

/// Default ε grid for the concentration-point condition: `1e-1 … 1e-6`.
pub const DEFAULT_EPS_GRID: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedConstants {
    /// Growth constant `C`.
    #[serde(serialize_with = "json::float")]
    pub growth: f64,
    /// Lipschitz constant `L` of drift and diffusion.
    #[serde(serialize_with = "json::float")]
    pub lipschitz: f64,
    /// `L_k`, squared Lipschitz constant of the `k`-th impulse.
    pub jump_lipschitz: Sequence,
    /// `γ_k`, supremum norm of the `k`-th impulse.
    pub jump_sup: Sequence,
    #[serde(serialize_with = "json::float")]
    pub jump_lipschitz_sum: f64,
    #[serde(serialize_with = "json::float")]
    pub jump_sup_sum: f64,
    pub jump_lipschitz_divergent: bool,
    pub jump_sup_divergent: bool,
}

impl DerivedConstants {
    /// `L_k` for schedule index `k`.
    pub fn jump_lipschitz_at(&self, k: usize) -> f64 {
        self.jump_lipschitz.term(k)
    }
}

pub fn derive_constants(spec: &SystemSpec) -> Result<DerivedConstants, SystemError> {
    let dim = spec.dim();
    let marks = spec.eta();
    let jump_lipschitz = spec.jump().lipschitz_sequence(marks, dim)?;
    let jump_sup = spec.jump().gamma_sequence(marks, dim)?;

    let regimes = 0..spec.n_regimes();
    let coeff_growth = regimes
        .clone()
        .map(|i| spec.drift().growth_sq(i, dim) + spec.diffusion().growth_sq(i, dim))
        .fold(0.0, f64::max);
    let lipschitz = regimes
        .map(|i| spec.drift().lipschitz_sq(i) + spec.diffusion().lipschitz_sq(i))
        .fold(0.0, f64::max);
    let sup_gamma = jump_sup.sup();
    let growth = coeff_growth + sup_gamma * sup_gamma;

    let jump_lipschitz_sum = jump_lipschitz.sum();
    let jump_sup_sum = jump_sup.sum();
    Ok(DerivedConstants {
        growth,
        lipschitz,
        jump_lipschitz_divergent: !jump_lipschitz_sum.is_finite(),
        jump_sup_divergent: !jump_sup_sum.is_finite(),
        jump_lipschitz,
        jump_sup,
        jump_lipschitz_sum,
        jump_sup_sum,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionOutcome {
    pub pass: bool,
    #[serde(serialize_with = "json::float")]
    pub value: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationRow {
    pub eps: f64,
    pub n_eps: Option<usize>,
    /// `ln ε + N_ε Σ_{k<=N_ε} L_k`
    #[serde(serialize_with = "json::opt_float")]
    pub value: Option<f64>,
}

/// Finite-grid surrogate for the limit `ln ε + N_ε Σ L_k → -∞` as `ε ↓ 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    /// Rows ordered by decreasing ε.
    pub rows: Vec<ConcentrationRow>,
    pub monotone_decreasing: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub constants: DerivedConstants,
    pub growth: ConditionOutcome,
    pub lipschitz: ConditionOutcome,
    pub jump_lipschitz: ConditionOutcome,
    pub jump_summability: ConditionOutcome,
    pub concentration: ConcentrationReport,
    pub all_pass: bool,
}

pub fn check_conditions(spec: &SystemSpec, eps_grid: &[f64]) -> Result<ConditionReport, SystemError> {
    let c = derive_constants(spec)?;
    Ok(check_with_constants(c, eps_grid))
}

pub fn check_with_constants(c: DerivedConstants, eps_grid: &[f64]) -> ConditionReport {
    let finite = |v: f64, what: &str| ConditionOutcome {
        pass: v.is_finite(),
        value: v,
        detail: if v.is_finite() { format!("{what} = {v}") } else { format!("{what} is unbounded") },
    };
    let growth = finite(c.growth, "C");
    let lipschitz = finite(c.lipschitz, "L");
    let jump_lipschitz = finite(c.jump_lipschitz_sum, "sum L_k");
    let jump_summability = finite(c.jump_sup_sum, "sum gamma_k");
    let concentration = concentration_trend(&c, eps_grid);
    let all_pass = growth.pass
        && lipschitz.pass
        && jump_lipschitz.pass
        && jump_summability.pass
        && concentration.pass;
    ConditionReport { constants: c, growth, lipschitz, jump_lipschitz, jump_summability, concentration, all_pass }
}

fn concentration_trend(c: &DerivedConstants, eps_grid: &[f64]) -> ConcentrationReport {
    let mut grid: Vec<f64> = eps_grid.iter().copied().filter(|e| *e > 0.0).collect();
    grid.sort_by(|a, b| b.total_cmp(a));
    grid.dedup();
    let rows: Vec<ConcentrationRow> = grid
        .iter()
        .map(|&eps| match n_epsilon(&c.jump_sup, eps) {
            Ok(n) => ConcentrationRow {
                eps,
                n_eps: Some(n),
                value: Some(eps.ln() + n as f64 * c.jump_lipschitz.partial_sum(n)),
            },
            Err(_) => ConcentrationRow { eps, n_eps: None, value: None },
        })
        .collect();
    let values: Option<Vec<f64>> = rows.iter().map(|r| r.value.filter(|v| v.is_finite())).collect();
    let monotone_decreasing = match &values {
        Some(v) if !v.is_empty() => v.windows(2).all(|w| w[1] < w[0]),
        _ => false,
    };
    ConcentrationReport { rows, monotone_decreasing, pass: monotone_decreasing }
}
