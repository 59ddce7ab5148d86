//! Nested Monte Carlo along the jump skeleton: does `E v(t_k, x(t_k))`
//! decrease in `k`?

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;

use super::{le_within, AnalysisError};
use crate::json;
use crate::lyapunov::{Point, SmoothFunction};
use crate::simulate::{run_segment, IntegratorConfig, PathState, RngPolicy};
use crate::stats::{Estimate, Welford};
use crate::system::SystemSpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupermartingaleRow {
    pub k: usize,
    #[serde(serialize_with = "json::float")]
    pub t_k: f64,
    #[serde(serialize_with = "json::float")]
    pub t_next: f64,
    /// `E v_k` over outer paths.
    pub v_k: Estimate,
    /// `E v_{k+1}`, each outer path contributing its inner mean.
    pub v_next: Estimate,
    /// Paired difference `E[v_{k+1} - v_k]`.
    pub diff: Estimate,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupermartingaleReport {
    pub n_outer: u64,
    pub n_inner: u64,
    pub rows: Vec<SupermartingaleRow>,
    pub pass: bool,
}

impl SupermartingaleReport {
    /// `k,t_k,t_next,v_k,v_next,diff,diff_stderr,pass`
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "k,t_k,t_next,v_k,v_next,diff,diff_stderr,pass")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.k, r.t_k, r.t_next, r.v_k.mean, r.v_next.mean, r.diff.mean, r.diff.stderr, r.pass
            )?;
        }
        Ok(())
    }
}

fn estimate(values: impl Iterator<Item = f64> + Clone, n: u64) -> Estimate {
    if values.clone().all(f64::is_finite) {
        values.collect::<Welford>().estimate()
    } else {
        Estimate::new(f64::INFINITY, f64::INFINITY, n)
    }
}

fn value(v: &dyn SmoothFunction, s: &PathState) -> f64 {
    v.value(&Point::new(s.t, s.regime, s.mark, &s.x))
}

/// For each outer path and each `k` in `k_range`, records `v` at `t_k` and
/// the mean of `v` at `t_{k+1}` over `n_inner` continuations from that
/// state. The outer path then moves on to `t_{k+1}` with its own noise.
/// Skeleton points count from `t_0 = 0`. A row passes when the paired
/// difference is at most 3 standard errors above zero.
pub fn probe_supermartingale(
    spec: &SystemSpec,
    cfg: &IntegratorConfig,
    v: &dyn SmoothFunction,
    k_range: RangeInclusive<usize>,
    n_outer: u64,
    n_inner: u64,
    policy: &RngPolicy,
) -> Result<SupermartingaleReport, AnalysisError> {
    if n_outer == 0 || n_inner == 0 {
        return Err(AnalysisError::InvalidParameter("n_outer and n_inner must be at least 1".into()));
    }
    let (k_lo, k_hi) = (*k_range.start(), *k_range.end());
    if k_lo > k_hi {
        return Err(AnalysisError::InvalidParameter("empty k range".into()));
    }
    let schedule = spec.schedule();
    let times: Vec<f64> = (k_lo..=k_hi + 1)
        .map(|k| schedule.skeleton_time(k).ok_or(AnalysisError::InvalidSegment { k: k_hi, available: schedule.len() }))
        .collect::<Result<_, _>>()?;
    let n_k = k_hi - k_lo + 1;

    // Per outer path: (v_k, inner mean of v_{k+1}) for each k.
    let outer: Vec<Vec<(f64, f64)>> = (0..n_outer)
        .into_par_iter()
        .map(|o| {
            let mut streams = policy.path_streams("skeleton-outer", &[o]);
            let mut state = PathState::initial(spec);
            let mut alive = !run_segment(spec, cfg, &mut state, times[0], &[], &mut streams, &mut ()).exploded();
            let mut out = Vec::with_capacity(n_k);
            for (j, k) in (k_lo..=k_hi).enumerate() {
                if !alive {
                    out.push((f64::INFINITY, f64::INFINITY));
                    continue;
                }
                let vk = value(v, &state);
                let mut inner = Welford::new();
                let mut inner_exploded = false;
                for i in 0..n_inner {
                    let mut s = policy.path_streams("skeleton-inner", &[o, k as u64, i]);
                    let mut st = state.clone();
                    if run_segment(spec, cfg, &mut st, times[j + 1], &[], &mut s, &mut ()).exploded() {
                        inner_exploded = true;
                        break;
                    }
                    inner.push(value(v, &st));
                }
                out.push((vk, if inner_exploded { f64::INFINITY } else { inner.mean() }));
                alive = !run_segment(spec, cfg, &mut state, times[j + 1], &[], &mut streams, &mut ()).exploded();
            }
            out
        })
        .collect();

    let rows: Vec<SupermartingaleRow> = (0..n_k)
        .map(|j| {
            let col = outer.iter().map(move |p| p[j]);
            let v_k = estimate(col.clone().map(|c| c.0), n_outer);
            let v_next = estimate(col.clone().map(|c| c.1), n_outer);
            let diff = estimate(col.map(|c| if c.0.is_finite() { c.1 - c.0 } else { f64::INFINITY }), n_outer);
            SupermartingaleRow {
                k: k_lo + j,
                t_k: times[j],
                t_next: times[j + 1],
                pass: le_within(diff.mean, diff.stderr, 0.0, 0.0),
                v_k,
                v_next,
                diff,
            }
        })
        .collect();
    let pass = rows.iter().all(|r| r.pass);
    Ok(SupermartingaleReport { n_outer, n_inner, rows, pass })
}
