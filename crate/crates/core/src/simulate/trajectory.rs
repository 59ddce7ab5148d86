//! Recorded single paths and their CSV form.

use std::io::{self, Write};

use serde::Serialize;

use super::engine::{run_segment, IntegratorConfig, JumpEvent, PathObserver, PathState, PathStatus};
use super::rng::RngPolicy;
use crate::system::SystemSpec;

/// Stream label for simulated paths.
pub const PATH_LABEL: &str = "path";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleEvent {
    None,
    Jump(usize),
    Switch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub x: Vec<f64>,
    /// 0-based regime.
    pub regime: usize,
    pub event: SampleEvent,
}

/// Càdlàg path: a sample at an event time holds the post-event value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub jump_events: Vec<JumpEvent>,
    pub status: PathStatus,
}

impl Trajectory {
    /// `t,x_1..x_m,regime,event` with 1-based regimes.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let dim = self.samples.first().map_or(0, |s| s.x.len());
        let mut header = String::from("t");
        for j in 1..=dim {
            header.push_str(&format!(",x_{j}"));
        }
        header.push_str(",regime,event");
        writeln!(w, "{header}")?;
        for s in &self.samples {
            write!(w, "{}", s.t)?;
            for v in &s.x {
                write!(w, ",{v}")?;
            }
            let event = match s.event {
                SampleEvent::None => String::new(),
                SampleEvent::Jump(k) => format!("jump:{k}"),
                SampleEvent::Switch => "switch".to_string(),
            };
            writeln!(w, ",{},{event}", s.regime + 1)?;
        }
        Ok(())
    }
}

struct Recorder {
    stride: usize,
    steps: usize,
    samples: Vec<Sample>,
    jump_events: Vec<JumpEvent>,
}

impl Recorder {
    fn push(&mut self, s: &PathState, event: SampleEvent) {
        if let Some(last) = self.samples.last_mut() {
            if last.t == s.t {
                // Right-continuity: an event replaces a plain sample at the
                // same instant, and a plain sample never follows one.
                if event == SampleEvent::None {
                    return;
                }
                if last.event == SampleEvent::None {
                    *last = Sample { t: s.t, x: s.x.clone(), regime: s.regime, event };
                    return;
                }
            }
        }
        self.samples.push(Sample { t: s.t, x: s.x.clone(), regime: s.regime, event });
    }
}

impl PathObserver for Recorder {
    fn on_start(&mut self, s: &PathState) {
        self.push(s, SampleEvent::None);
    }
    fn on_step(&mut self, s: &PathState) {
        self.steps += 1;
        if self.steps.is_multiple_of(self.stride) {
            self.push(s, SampleEvent::None);
        }
    }
    fn on_jump(&mut self, e: &JumpEvent, s: &PathState) {
        self.jump_events.push(e.clone());
        self.push(s, SampleEvent::Jump(e.index));
    }
    fn on_switch(&mut self, _from: usize, s: &PathState) {
        self.push(s, SampleEvent::Switch);
    }
    fn on_explode(&mut self, s: &PathState) {
        if self.samples.last().is_none_or(|l| l.t != s.t || l.x != s.x) {
            self.push(s, SampleEvent::None);
        }
    }
}

/// Simulates path `path_index` on `[0, horizon]`.
pub fn simulate_path(
    spec: &SystemSpec,
    cfg: &IntegratorConfig,
    horizon: f64,
    path_index: u64,
    policy: &RngPolicy,
) -> Trajectory {
    let mut streams = policy.path_streams(PATH_LABEL, &[path_index]);
    let mut state = PathState::initial(spec);
    let mut rec = Recorder { stride: cfg.record_stride.max(1), steps: 0, samples: Vec::new(), jump_events: Vec::new() };
    let status = run_segment(spec, cfg, &mut state, horizon, &[], &mut streams, &mut rec);
    if !status.exploded() && rec.samples.last().is_none_or(|l| l.t != state.t) {
        rec.push(&state, SampleEvent::None);
    }
    Trajectory { samples: rec.samples, jump_events: rec.jump_events, status }
}
