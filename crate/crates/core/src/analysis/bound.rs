//! The second-moment bound on one inter-jump segment.

use rayon::prelude::*;
use serde::Serialize;

use super::AnalysisError;
use crate::json;
use crate::simulate::{run_segment, IntegratorConfig, PathState, RngPolicy, SupTracker};
use crate::stats::{Estimate, Welford};
use crate::system::{derive_constants, SystemSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheckResult {
    /// Segment `[t_k, t_{k+1}]`, with `t_0 = 0`.
    pub k: usize,
    #[serde(serialize_with = "json::float")]
    pub t_start: f64,
    #[serde(serialize_with = "json::float")]
    pub t_end: f64,
    /// Schedule index of the jump closing the segment.
    pub jump_index: usize,
    /// `E sup ‖x‖²` over the segment, jumps at both ends included.
    pub lhs: Estimate,
    /// `E ‖x(t_k)‖²` from the same paths.
    pub start_mean_sq: Estimate,
    #[serde(serialize_with = "json::float")]
    pub growth: f64,
    #[serde(serialize_with = "json::float")]
    pub jump_lipschitz_next: f64,
    #[serde(serialize_with = "json::float")]
    pub rhs: f64,
    pub exploded: u64,
    pub pass: bool,
}

/// `9 e^{5C} (1 + 2 L_{k+1}) [E‖x(t_k)‖² + 5C (t_{k+1} - t_k)]`.
fn bound_rhs(c: f64, l_next: f64, start_mean_sq: f64, dt: f64) -> f64 {
    9.0 * (5.0 * c).exp() * (1.0 + 2.0 * l_next) * (start_mean_sq + 5.0 * c * dt)
}

/// Simulates `n_paths` from the initial state through `t_k`, then tracks
/// `sup ‖x‖²` up to `t_{k+1}`.
pub fn verify_theorem1_bound(
    spec: &SystemSpec,
    cfg: &IntegratorConfig,
    k: usize,
    n_paths: u64,
    policy: &RngPolicy,
) -> Result<BoundCheckResult, AnalysisError> {
    if n_paths == 0 {
        return Err(AnalysisError::InvalidParameter("n_paths must be at least 1".into()));
    }
    let schedule = spec.schedule();
    let (t_start, t_end) = match (schedule.skeleton_time(k), schedule.skeleton_time(k + 1)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(AnalysisError::InvalidSegment { k, available: schedule.len() }),
    };
    let jump_index = schedule.jumps()[k].index;
    let constants = derive_constants(spec).map_err(|e| AnalysisError::ConstantsUnavailable(e.to_string()))?;
    let c = constants.growth;
    let l_next = constants.jump_lipschitz_at(jump_index);
    if !(c.is_finite() && l_next.is_finite()) {
        return Err(AnalysisError::ConstantsUnavailable(format!("C = {c}, L_{{k+1}} = {l_next}")));
    }

    let samples: Vec<(f64, f64)> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut streams = policy.path_streams("bound", &[k as u64, i]);
            let mut state = PathState::initial(spec);
            if run_segment(spec, cfg, &mut state, t_start, &[], &mut streams, &mut ()).exploded() {
                return (f64::INFINITY, f64::INFINITY);
            }
            let start = state.norm_sq();
            let mut sup = SupTracker::default();
            if run_segment(spec, cfg, &mut state, t_end, &[], &mut streams, &mut sup).exploded() {
                return (start, f64::INFINITY);
            }
            (start, sup.sup_norm_sq)
        })
        .collect();

    let exploded = samples.iter().filter(|s| s.1.is_infinite()).count() as u64;
    let lhs = if exploded > 0 {
        Estimate::new(f64::INFINITY, f64::INFINITY, n_paths)
    } else {
        samples.iter().map(|s| s.1).collect::<Welford>().estimate()
    };
    let start_mean_sq = samples.iter().map(|s| s.0).collect::<Welford>().estimate();
    let rhs = bound_rhs(c, l_next, start_mean_sq.mean, t_end - t_start);
    Ok(BoundCheckResult {
        k,
        t_start,
        t_end,
        jump_index,
        pass: lhs.ci_high <= rhs,
        lhs,
        start_mean_sq,
        growth: c,
        jump_lipschitz_next: l_next,
        rhs,
        exploded,
    })
}
