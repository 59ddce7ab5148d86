//! Parallel ensembles with results reduced in path order.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use super::engine::{run_segment, IntegratorConfig, JumpEvent, PathObserver, PathState, PathStatus};
use super::rng::RngPolicy;
use super::trajectory::PATH_LABEL;
use crate::json;
use crate::stats::{median, Welford};
use crate::system::SystemSpec;

/// Runs `f` on a pool of `threads` workers, or the global pool for `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

/// `n + 1` evenly spaced points on `[0, horizon]`.
pub fn uniform_grid(horizon: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n).map(|i| if i == n { horizon } else { horizon * i as f64 / n as f64 }).collect()
}

/// Per-path reduction input.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSummary {
    /// `‖x(t)‖²` at each grid point, `None` once exploded.
    pub grid_norm_sq: Vec<Option<f64>>,
    /// `sup ‖x‖` over the run; `+∞` for exploded paths.
    pub sup_norm: f64,
    pub status: PathStatus,
}

struct GridObserver<'a> {
    grid: &'a [f64],
    values: Vec<Option<f64>>,
    sup_sq: f64,
}

impl GridObserver<'_> {
    fn seen(&mut self, s: &PathState) {
        self.sup_sq = self.sup_sq.max(s.norm_sq());
    }
}

impl PathObserver for GridObserver<'_> {
    fn on_start(&mut self, s: &PathState) {
        self.seen(s);
        for (i, &t) in self.grid.iter().enumerate() {
            if t <= s.t {
                self.values[i] = Some(s.norm_sq());
            }
        }
    }
    fn on_step(&mut self, s: &PathState) {
        self.seen(s);
    }
    fn on_jump(&mut self, _e: &JumpEvent, s: &PathState) {
        self.seen(s);
    }
    fn on_switch(&mut self, _from: usize, s: &PathState) {
        self.seen(s);
    }
    fn on_checkpoint(&mut self, index: usize, s: &PathState) {
        self.values[index] = Some(s.norm_sq());
    }
}

/// Simulates one path and records `‖x‖²` on `grid` (ascending, within
/// `[0, horizon]`).
pub fn summarize_path(
    spec: &SystemSpec,
    cfg: &IntegratorConfig,
    horizon: f64,
    grid: &[f64],
    path_index: u64,
    policy: &RngPolicy,
) -> PathSummary {
    let mut streams = policy.path_streams(PATH_LABEL, &[path_index]);
    let mut state = PathState::initial(spec);
    let mut obs = GridObserver { grid, values: vec![None; grid.len()], sup_sq: 0.0 };
    let status = run_segment(spec, cfg, &mut state, horizon, grid, &mut streams, &mut obs);
    let sup_norm = if status.exploded() { f64::INFINITY } else { obs.sup_sq.sqrt() };
    PathSummary { grid_norm_sq: obs.values, sup_norm, status }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    #[serde(serialize_with = "json::float")]
    pub t: f64,
    /// Mean of `‖x(t)‖²` over paths not yet exploded.
    #[serde(serialize_with = "json::float")]
    pub mean_sq_norm: f64,
    #[serde(serialize_with = "json::float")]
    pub stderr: f64,
    pub explosion_fraction: f64,
    pub survivors: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupStats {
    #[serde(serialize_with = "json::float")]
    pub mean: f64,
    #[serde(serialize_with = "json::float")]
    pub median: f64,
    #[serde(serialize_with = "json::float")]
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub n_paths: u64,
    #[serde(serialize_with = "json::float")]
    pub horizon: f64,
    pub grid: Vec<GridPoint>,
    /// Statistics of the per-path `sup ‖x‖`; exploded paths count as `+∞`.
    pub sup: SupStats,
    pub exploded: u64,
    #[serde(serialize_with = "json::floats")]
    pub explosion_times: Vec<f64>,
    #[serde(skip)]
    pub path_sups: Vec<f64>,
}

impl EnsembleSummary {
    pub fn explosion_fraction(&self) -> f64 {
        self.exploded as f64 / self.n_paths as f64
    }

    /// Fraction of paths exploded at or before `t`.
    pub fn exploded_by(&self, t: f64) -> f64 {
        self.explosion_times.iter().filter(|&&te| te <= t).count() as f64 / self.n_paths as f64
    }

    /// `t,mean_sq_norm,stderr,explosion_fraction`
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,mean_sq_norm,stderr,explosion_fraction")?;
        for p in &self.grid {
            writeln!(w, "{},{},{},{}", p.t, p.mean_sq_norm, p.stderr, p.explosion_fraction)?;
        }
        Ok(())
    }
}

/// Reduces per-path summaries in the given order.
pub fn reduce(horizon: f64, grid: &[f64], paths: &[PathSummary]) -> EnsembleSummary {
    let n = paths.len() as u64;
    let mut stats = vec![Welford::new(); grid.len()];
    for p in paths {
        for (w, v) in stats.iter_mut().zip(&p.grid_norm_sq) {
            if let Some(v) = v {
                w.push(*v);
            }
        }
    }
    let points = grid
        .iter()
        .zip(&stats)
        .map(|(&t, w)| GridPoint {
            t,
            mean_sq_norm: w.mean(),
            stderr: w.stderr(),
            explosion_fraction: (n - w.count()) as f64 / n as f64,
            survivors: w.count(),
        })
        .collect();
    let path_sups: Vec<f64> = paths.iter().map(|p| p.sup_norm).collect();
    let explosion_times: Vec<f64> = paths
        .iter()
        .filter_map(|p| match p.status {
            PathStatus::Exploded { time } => Some(time),
            PathStatus::Completed => None,
        })
        .collect();
    let sup = SupStats {
        mean: path_sups.iter().sum::<f64>() / n as f64,
        median: median(&path_sups),
        max: path_sups.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    };
    EnsembleSummary {
        n_paths: n,
        horizon,
        grid: points,
        sup,
        exploded: explosion_times.len() as u64,
        explosion_times,
        path_sups,
    }
}

/// Per-path summaries of `n_paths` paths on `[0, horizon]`, in path order.
/// `grid` is filtered to `[0, horizon]`, sorted and deduplicated first; the
/// returned grid is the one the values refer to.
pub fn ensemble_paths(
    spec: &SystemSpec,
    cfg: &IntegratorConfig,
    horizon: f64,
    n_paths: u64,
    grid: &[f64],
    policy: &RngPolicy,
) -> (Vec<f64>, Vec<PathSummary>) {
    let mut grid: Vec<f64> = grid.iter().copied().filter(|t| (0.0..=horizon).contains(t)).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let paths = (0..n_paths)
        .into_par_iter()
        .map(|i| summarize_path(spec, cfg, horizon, &grid, i, policy))
        .collect();
    (grid, paths)
}

/// Runs `n_paths` paths on `[0, horizon]` and summarizes them on `grid`.
/// Output does not depend on the number of worker threads.
pub fn simulate_ensemble(
    spec: &SystemSpec,
    cfg: &IntegratorConfig,
    horizon: f64,
    n_paths: u64,
    grid: &[f64],
    policy: &RngPolicy,
) -> EnsembleSummary {
    let (grid, paths) = ensemble_paths(spec, cfg, horizon, n_paths, grid, policy);
    reduce(horizon, &grid, &paths)
}
