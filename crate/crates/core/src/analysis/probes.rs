//! Ensemble probes for stability in probability and in mean square.

use serde::Serialize;

use super::{le_within, AnalysisError, SIGMA_MARGIN};
use crate::json;
use crate::simulate::{ensemble_paths, simulate_ensemble, IntegratorConfig, RngPolicy};
use crate::stats::Estimate;
use crate::system::SystemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeKind {
    /// `P{sup ‖x‖ > ε₁}` as a function of the initial size `δ`.
    ProbSup,
    /// `P{‖x(T)‖ > ε₁}` along a time grid.
    AsymptoticProb,
    /// `E‖x(t)‖²` along a time grid.
    MeanSquare,
}

/// One probe point: `δ` for `ProbSup`, `t` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    #[serde(serialize_with = "json::float")]
    pub param: f64,
    pub estimate: Estimate,
    pub explosion_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityProbeResult {
    pub kind: ProbeKind,
    #[serde(serialize_with = "json::opt_float")]
    pub eps1: Option<f64>,
    /// Finite horizon standing in for `t >= 0`.
    #[serde(serialize_with = "json::float")]
    pub horizon: f64,
    pub n_paths: u64,
    pub rows: Vec<ProbeRow>,
    pub verdict: bool,
    pub note: String,
}

impl StabilityProbeResult {
    /// `param,mean,stderr,ci_low,ci_high,explosion_fraction`
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let head = if self.kind == ProbeKind::ProbSup { "delta" } else { "t" };
        writeln!(w, "{head},mean,stderr,ci_low,ci_high,explosion_fraction")?;
        for r in &self.rows {
            let e = &r.estimate;
            writeln!(w, "{},{},{},{},{},{}", r.param, e.mean, e.stderr, e.ci_low, e.ci_high, r.explosion_fraction)?;
        }
        Ok(())
    }
}

fn check_positive(name: &str, v: f64) -> Result<(), AnalysisError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(AnalysisError::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

fn check_paths(n: u64) -> Result<(), AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::InvalidParameter("n_paths must be at least 1".into()));
    }
    Ok(())
}

fn check_grid(grid: &[f64]) -> Result<(), AnalysisError> {
    if grid.is_empty() || grid[0] < 0.0 || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(AnalysisError::InvalidParameter("time grid must be nonempty, nonnegative and increasing".into()));
    }
    Ok(())
}

/// Exceedance of `sup_{[0, horizon]} ‖x‖ > eps1` from `‖x0‖ = δ`, for each
/// `δ` in `delta_grid`. All δ share the same random streams. The verdict
/// holds when exceedance does not increase, beyond 3σ, as δ shrinks.
pub fn probe_stability_in_probability(
    spec: &SystemSpec,
    cfg: &IntegratorConfig,
    eps1: f64,
    horizon: f64,
    n_paths: u64,
    delta_grid: &[f64],
    policy: &RngPolicy,
) -> Result<StabilityProbeResult, AnalysisError> {
    check_positive("eps1", eps1)?;
    check_positive("horizon", horizon)?;
    check_paths(n_paths)?;
    if delta_grid.is_empty() || delta_grid.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(AnalysisError::InvalidParameter("delta grid must be nonempty and nonnegative".into()));
    }
    let norm = spec.x0().iter().map(|v| v * v).sum::<f64>().sqrt();
    let dir: Vec<f64> = if norm > 0.0 {
        spec.x0().iter().map(|v| v / norm).collect()
    } else {
        let mut e = vec![0.0; spec.dim()];
        e[0] = 1.0;
        e
    };
    let mut deltas = delta_grid.to_vec();
    deltas.sort_by(|a, b| b.total_cmp(a));
    deltas.dedup();

    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in &deltas {
        let s = spec.with_x0(dir.iter().map(|d| d * delta).collect())?;
        let ens = simulate_ensemble(&s, cfg, horizon, n_paths, &[], policy);
        let hits = ens.path_sups.iter().filter(|&&m| !(m <= eps1)).count() as u64;
        rows.push(ProbeRow {
            param: delta,
            estimate: Estimate::proportion(hits, n_paths),
            explosion_fraction: ens.explosion_fraction(),
        });
    }
    let verdict = rows
        .windows(2)
        .all(|w| le_within(w[1].estimate.mean, w[1].estimate.stderr, w[0].estimate.mean, w[0].estimate.stderr));
    Ok(StabilityProbeResult {
        kind: ProbeKind::ProbSup,
        eps1: Some(eps1),
        horizon,
        n_paths,
        rows,
        verdict,
        note: format!("sup over t >= 0 truncated to [0, {horizon}]"),
    })
}

/// `P{‖x(t)‖ > eps1}` along `time_grid`. The verdict holds when the last
/// point does not exceed the first beyond 3σ; the limit `T → ∞` is only
/// probed up to the last grid time.
pub fn probe_asymptotic_in_probability(
    spec: &SystemSpec,
    cfg: &IntegratorConfig,
    eps1: f64,
    time_grid: &[f64],
    n_paths: u64,
    policy: &RngPolicy,
) -> Result<StabilityProbeResult, AnalysisError> {
    check_positive("eps1", eps1)?;
    check_paths(n_paths)?;
    check_grid(time_grid)?;
    let horizon = time_grid[time_grid.len() - 1];
    let (grid, paths) = ensemble_paths(spec, cfg, horizon, n_paths, time_grid, policy);
    let rows: Vec<ProbeRow> = grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let exploded = paths.iter().filter(|p| p.grid_norm_sq[i].is_none()).count() as u64;
            // Exploded paths count as exceeding.
            let hits = paths.iter().filter(|p| p.grid_norm_sq[i].is_none_or(|n2| !(n2.sqrt() <= eps1))).count();
            ProbeRow {
                param: t,
                estimate: Estimate::proportion(hits as u64, n_paths),
                explosion_fraction: exploded as f64 / n_paths as f64,
            }
        })
        .collect();
    let (first, last) = (&rows[0].estimate, &rows[rows.len() - 1].estimate);
    let verdict = le_within(last.mean, last.stderr, first.mean, first.stderr);
    Ok(StabilityProbeResult {
        kind: ProbeKind::AsymptoticProb,
        eps1: Some(eps1),
        horizon,
        n_paths,
        rows,
        verdict,
        note: format!("limit T -> infinity probed only up to T = {horizon}"),
    })
}

/// `E‖x(t)‖²` along `time_grid`. A point where any path has exploded has an
/// infinite mean. The verdict holds when the last point lies below the
/// first with 3σ intervals separated.
pub fn probe_mean_square(
    spec: &SystemSpec,
    cfg: &IntegratorConfig,
    time_grid: &[f64],
    n_paths: u64,
    policy: &RngPolicy,
) -> Result<StabilityProbeResult, AnalysisError> {
    check_paths(n_paths)?;
    check_grid(time_grid)?;
    let horizon = time_grid[time_grid.len() - 1];
    let ens = simulate_ensemble(spec, cfg, horizon, n_paths, time_grid, policy);
    let rows: Vec<ProbeRow> = ens
        .grid
        .iter()
        .map(|p| {
            let estimate = if p.survivors < n_paths {
                Estimate::new(f64::INFINITY, f64::INFINITY, n_paths)
            } else {
                Estimate::new(p.mean_sq_norm, p.stderr, n_paths)
            };
            ProbeRow { param: p.t, estimate, explosion_fraction: p.explosion_fraction }
        })
        .collect();
    let (first, last) = (&rows[0].estimate, &rows[rows.len() - 1].estimate);
    let verdict = rows.len() >= 2
        && last.mean.is_finite()
        && last.mean + SIGMA_MARGIN * last.stderr < first.mean - SIGMA_MARGIN * first.stderr;
    Ok(StabilityProbeResult {
        kind: ProbeKind::MeanSquare,
        eps1: None,
        horizon,
        n_paths,
        rows,
        verdict,
        note: format!("lim sup probed only up to t = {horizon}"),
    })
}
