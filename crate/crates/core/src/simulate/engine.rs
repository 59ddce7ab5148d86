//! Hybrid Euler–Maruyama integration between structure switches and
//! scheduled impulses.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::rng::PathStreams;
use crate::markov::{sample_ctmc_window, sample_dtmc_step};
use crate::system::{ScheduledJump, SystemSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    /// Upper bound on the step size.
    pub dt_max: f64,
    /// Cap each step at half the distance between consecutive jumps, so
    /// densely packed jumps near an accumulation point are resolved.
    pub refine_near_star: bool,
    /// Keep every `record_stride`-th step in recorded trajectories.
    pub record_stride: usize,
    /// A path whose norm exceeds this is stopped and marked exploded.
    pub overflow_threshold: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { dt_max: 1e-3, refine_near_star: true, record_stride: 1, overflow_threshold: 1e12 }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.dt_max.is_finite() && self.dt_max > 0.0) {
            return Err(format!("dt_max must be positive, got {}", self.dt_max));
        }
        if !(self.overflow_threshold > 0.0) {
            return Err(format!("overflow_threshold must be positive, got {}", self.overflow_threshold));
        }
        if self.record_stride == 0 {
            return Err("record_stride must be at least 1".into());
        }
        Ok(())
    }

    pub fn with_dt_max(mut self, dt_max: f64) -> Self {
        self.dt_max = dt_max;
        self
    }
}

/// Hybrid state `(t, x, ξ, η)`; `regime` and `mark` are 0-based indices.
#[derive(Debug, Clone, PartialEq)]
pub struct PathState {
    pub t: f64,
    pub x: Vec<f64>,
    pub regime: usize,
    pub mark: usize,
}

impl PathState {
    pub fn initial(spec: &SystemSpec) -> Self {
        PathState { t: 0.0, x: spec.x0().to_vec(), regime: spec.y0(), mark: spec.h0() }
    }

    pub fn norm_sq(&self) -> f64 {
        self.x.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PathStatus {
    Completed,
    Exploded { time: f64 },
}

impl PathStatus {
    pub fn exploded(&self) -> bool {
        matches!(self, PathStatus::Exploded { .. })
    }
}

/// One applied impulse.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpEvent {
    /// Schedule index `k`.
    pub index: usize,
    pub time: f64,
    /// Mark state drawn for this jump (0-based) and its value.
    pub mark: usize,
    pub mark_value: f64,
    pub regime: usize,
    pub x_before: Vec<f64>,
    pub x_after: Vec<f64>,
}

/// Callbacks fired while a path is integrated. States passed to `on_step`,
/// `on_jump` and `on_switch` are the values right after that event.
pub trait PathObserver {
    fn on_start(&mut self, _state: &PathState) {}
    fn on_step(&mut self, _state: &PathState) {}
    fn on_jump(&mut self, _event: &JumpEvent, _state: &PathState) {}
    fn on_switch(&mut self, _from: usize, _state: &PathState) {}
    /// Fired once per requested checkpoint, after all events at that time.
    fn on_checkpoint(&mut self, _index: usize, _state: &PathState) {}
    fn on_explode(&mut self, _state: &PathState) {}
}

impl PathObserver for () {}

/// Tracks `sup ‖x‖` over every visited state.
#[derive(Debug, Clone, Copy, Default)]
pub struct SupTracker {
    pub sup_norm_sq: f64,
}

impl PathObserver for SupTracker {
    fn on_start(&mut self, s: &PathState) {
        self.sup_norm_sq = self.sup_norm_sq.max(s.norm_sq());
    }
    fn on_step(&mut self, s: &PathState) {
        self.sup_norm_sq = self.sup_norm_sq.max(s.norm_sq());
    }
    fn on_jump(&mut self, _e: &JumpEvent, s: &PathState) {
        self.sup_norm_sq = self.sup_norm_sq.max(s.norm_sq());
    }
    fn on_switch(&mut self, _from: usize, s: &PathState) {
        self.sup_norm_sq = self.sup_norm_sq.max(s.norm_sq());
    }
    fn on_explode(&mut self, s: &PathState) {
        let n = s.norm_sq();
        self.sup_norm_sq = self.sup_norm_sq.max(if n.is_nan() { f64::INFINITY } else { n });
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Boundary {
    End,
    Jump(usize),
    Switch(usize),
    Checkpoint(usize),
}

fn exceeds(x: &[f64], threshold: f64) -> bool {
    let n2: f64 = x.iter().map(|v| v * v).sum();
    !(n2.sqrt() <= threshold)
}

/// Integrates from `state` (at `state.t`) to `t_end`, applying the scheduled
/// jumps in `(state.t, t_end]`. `checkpoints` must be ascending; those outside
/// `(state.t, t_end]` are ignored. On return `state` holds the final state.
pub fn run_segment<O: PathObserver + ?Sized>(
    spec: &SystemSpec,
    cfg: &IntegratorConfig,
    state: &mut PathState,
    t_end: f64,
    checkpoints: &[f64],
    streams: &mut PathStreams,
    observer: &mut O,
) -> PathStatus {
    let start = state.t;
    observer.on_start(state);
    if exceeds(&state.x, cfg.overflow_threshold) {
        observer.on_explode(state);
        return PathStatus::Exploded { time: start };
    }
    if !(t_end > start) {
        return PathStatus::Completed;
    }

    let chain = sample_ctmc_window(spec.xi(), state.regime, start, t_end, &mut streams.chain)
        .expect("validated generator and window");
    let switches: Vec<(f64, usize)> = chain.switches().collect();
    let jumps: &[ScheduledJump] = spec.schedule().within(start, t_end);
    let lo = checkpoints.partition_point(|&c| c <= start);
    let hi = checkpoints.partition_point(|&c| c <= t_end);
    let cps = &checkpoints[lo..hi.max(lo)];

    let (mut ji, mut si, mut ci) = (0usize, 0usize, 0usize);
    let drift = spec.drift();
    let diffusion = spec.diffusion();
    let dim = state.x.len();
    let mut g = vec![0.0; dim];

    loop {
        // Next boundary; ties resolve jump, then switch, then checkpoint.
        let mut next = (t_end, Boundary::End);
        if let Some(j) = jumps.get(ji) {
            if j.time <= next.0 {
                next = (j.time, Boundary::Jump(ji));
            }
        }
        if let Some(&(ts, _)) = switches.get(si) {
            if ts < next.0 {
                next = (ts, Boundary::Switch(si));
            }
        }
        if let Some(&tc) = cps.get(ci) {
            if tc < next.0 {
                next = (tc, Boundary::Checkpoint(ci));
            }
        }
        let (tb, kind) = next;

        let span = tb - state.t;
        if span > 0.0 {
            let mut dt = cfg.dt_max;
            if cfg.refine_near_star {
                if let Some(j) = jumps.get(ji) {
                    let prev = if ji > 0 { jumps[ji - 1].time } else { start };
                    let gap = j.time - prev;
                    if gap > 0.0 {
                        dt = dt.min(gap / 2.0);
                    }
                }
            }
            let n = ((span / dt).ceil() as usize).max(1);
            let h = span / n as f64;
            let sqrt_h = h.sqrt();
            let t0 = state.t;
            let y = state.regime;
            for i in 1..=n {
                for v in state.x.iter_mut() {
                    let z: f64 = StandardNormal.sample(&mut streams.noise);
                    *v += drift.component(y, *v) * h + diffusion.component(y, *v) * sqrt_h * z;
                }
                state.t = if i == n { tb } else { t0 + i as f64 * h };
                observer.on_step(state);
                if exceeds(&state.x, cfg.overflow_threshold) {
                    observer.on_explode(state);
                    return PathStatus::Exploded { time: state.t };
                }
            }
        }
        state.t = tb;

        match kind {
            Boundary::End => {
                // Checkpoints exactly at t_end fire after any jump there.
                while let Some(&tc) = cps.get(ci) {
                    if tc <= tb {
                        observer.on_checkpoint(lo + ci, state);
                        ci += 1;
                    } else {
                        break;
                    }
                }
                return PathStatus::Completed;
            }
            Boundary::Jump(idx) => {
                let j = jumps[idx];
                ji += 1;
                let mark = sample_dtmc_step(spec.eta().transition(), state.mark, j.step, &mut streams.marks)
                    .expect("validated mark chain");
                state.mark = mark;
                let mark_value = spec.eta().value(mark);
                spec.jump().apply(j.index, mark_value, &state.x, &mut g);
                let x_before = state.x.clone();
                for (v, d) in state.x.iter_mut().zip(&g) {
                    *v += d;
                }
                let event = JumpEvent {
                    index: j.index,
                    time: j.time,
                    mark,
                    mark_value,
                    regime: state.regime,
                    x_before,
                    x_after: state.x.clone(),
                };
                observer.on_jump(&event, state);
                if exceeds(&state.x, cfg.overflow_threshold) {
                    observer.on_explode(state);
                    return PathStatus::Exploded { time: state.t };
                }
            }
            Boundary::Switch(idx) => {
                let (_, to) = switches[idx];
                si += 1;
                let from = state.regime;
                spec.switching().apply(from, to, &mut state.x);
                state.regime = to;
                observer.on_switch(from, state);
                if exceeds(&state.x, cfg.overflow_threshold) {
                    observer.on_explode(state);
                    return PathStatus::Exploded { time: state.t };
                }
            }
            Boundary::Checkpoint(_) => {
                observer.on_checkpoint(lo + ci, state);
                ci += 1;
            }
        }
    }
}
