//! Growth of the path supremum as the truncation level `K_max` is raised.

use serde::Serialize;

use super::AnalysisError;
use crate::json;
use crate::simulate::{simulate_ensemble, IntegratorConfig, RngPolicy};
use crate::system::SystemSpec;

/// Paths are integrated up to this norm so sup statistics stay finite well
/// beyond the configured overflow threshold.
pub const BLOWUP_CEILING: f64 = 1e300;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupRow {
    pub k_max: usize,
    /// Jumps realized after truncation.
    pub jumps: usize,
    #[serde(serialize_with = "json::float")]
    pub median_sup: f64,
    #[serde(serialize_with = "json::float")]
    pub max_sup: f64,
    /// Fraction of paths whose sup exceeds the configured overflow threshold.
    pub exploded_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupReport {
    #[serde(serialize_with = "json::float")]
    pub horizon: f64,
    pub n_paths: u64,
    #[serde(serialize_with = "json::float")]
    pub overflow_threshold: f64,
    pub rows: Vec<BlowupRow>,
    /// Median sup strictly increases with `K_max`.
    pub blowup: bool,
}

impl BlowupReport {
    /// `k_max,jumps,median_sup,max_sup,exploded_fraction`
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "k_max,jumps,median_sup,max_sup,exploded_fraction")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{},{}", r.k_max, r.jumps, r.median_sup, r.max_sup, r.exploded_fraction)?;
        }
        Ok(())
    }
}

/// Runs `n_paths` on `[0, horizon]` for each `K_max` (sorted ascending) with
/// the same random streams, and tabulates `sup ‖x‖`.
pub fn detect_blowup(
    spec: &SystemSpec,
    cfg: &IntegratorConfig,
    k_max_grid: &[usize],
    horizon: f64,
    n_paths: u64,
    policy: &RngPolicy,
) -> Result<BlowupReport, AnalysisError> {
    if n_paths == 0 || k_max_grid.is_empty() {
        return Err(AnalysisError::InvalidParameter("need at least one path and one K_max".into()));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(AnalysisError::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    let mut ks = k_max_grid.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let run_cfg = IntegratorConfig { overflow_threshold: BLOWUP_CEILING.max(cfg.overflow_threshold), ..cfg.clone() };
    let mut rows = Vec::with_capacity(ks.len());
    for k_max in ks {
        let s = spec.with_k_max(k_max)?;
        let ens = simulate_ensemble(&s, &run_cfg, horizon, n_paths, &[], policy);
        let over = ens.path_sups.iter().filter(|&&m| !(m <= cfg.overflow_threshold)).count();
        rows.push(BlowupRow {
            k_max,
            jumps: s.schedule().len(),
            median_sup: ens.sup.median,
            max_sup: ens.sup.max,
            exploded_fraction: over as f64 / n_paths as f64,
        });
    }
    let blowup = rows.len() >= 2 && rows.windows(2).all(|w| w[1].median_sup > w[0].median_sup);
    Ok(BlowupReport { horizon, n_paths, overflow_threshold: cfg.overflow_threshold, rows, blowup })
}
