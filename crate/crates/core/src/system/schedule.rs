//! Jump-time schedules, including sequences accumulating at a finite point.

use serde::Serialize;

use super::SystemError;

pub const DEFAULT_K_MAX: usize = 200;
pub const DEFAULT_DELTA_MIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleKind {
    /// Jump `k` happens at `times[k - 1]`.
    Explicit(Vec<f64>),
    /// `t_k = t_star - c / k`, accumulating at `t_star` from below.
    HarmonicToPoint { t_star: f64, c: f64 },
    /// `t_k = alpha / k`, accumulating at zero; index order is reversed in time.
    HarmonicToZero { alpha: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpSchedule {
    pub kind: ScheduleKind,
    /// Jumps with index `k > k_max` are dropped.
    pub k_max: usize,
    /// Jumps closer than this to an already kept jump are dropped.
    pub delta_min: f64,
}

impl JumpSchedule {
    pub fn new(kind: ScheduleKind) -> Self {
        JumpSchedule { kind, k_max: DEFAULT_K_MAX, delta_min: DEFAULT_DELTA_MIN }
    }

    pub fn with_k_max(mut self, k_max: usize) -> Self {
        self.k_max = k_max;
        self
    }

    pub fn with_delta_min(mut self, delta_min: f64) -> Self {
        self.delta_min = delta_min;
        self
    }

    /// Accumulation point of the untruncated sequence, if any.
    pub fn concentration_point(&self) -> Option<f64> {
        match self.kind {
            ScheduleKind::Explicit(_) => None,
            ScheduleKind::HarmonicToPoint { t_star, .. } => Some(t_star),
            ScheduleKind::HarmonicToZero { .. } => Some(0.0),
        }
    }

    fn validate(&self) -> Result<(), SystemError> {
        let bad = |msg: String| Err(SystemError::InvalidSchedule(msg));
        if self.k_max == 0 {
            return bad("k_max must be at least 1".into());
        }
        if !(self.delta_min.is_finite() && self.delta_min >= 0.0) {
            return bad(format!("delta_min must be finite and nonnegative, got {}", self.delta_min));
        }
        match &self.kind {
            ScheduleKind::Explicit(times) => {
                if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
                    return bad(format!("explicit jump times must be positive and finite, got {t}"));
                }
            }
            ScheduleKind::HarmonicToPoint { t_star, c } => {
                if !(t_star.is_finite() && *t_star > 0.0) {
                    return bad(format!("t_star must be positive and finite, got {t_star}"));
                }
                if !(c.is_finite() && *c > 0.0) {
                    return bad(format!("c must be positive and finite, got {c}"));
                }
            }
            ScheduleKind::HarmonicToZero { alpha } => {
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return bad(format!("alpha must be positive and finite, got {alpha}"));
                }
            }
        }
        Ok(())
    }
}

/// One realized jump: schedule index `k`, position `step` in time order
/// (1-based), and time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduledJump {
    pub index: usize,
    pub step: usize,
    pub time: f64,
}

/// Truncated, time-ordered schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratedSchedule {
    jumps: Vec<ScheduledJump>,
    truncated: usize,
    concentration_point: Option<f64>,
}

impl GeneratedSchedule {
    pub fn jumps(&self) -> &[ScheduledJump] {
        &self.jumps
    }

    /// Number of candidate jumps (`k <= k_max`) removed by truncation.
    pub fn truncated(&self) -> usize {
        self.truncated
    }

    pub fn concentration_point(&self) -> Option<f64> {
        self.concentration_point
    }

    pub fn len(&self) -> usize {
        self.jumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty()
    }

    /// Jump occurring exactly at `t`, if any.
    pub fn jump_at(&self, t: f64) -> Option<&ScheduledJump> {
        let i = self.jumps.partition_point(|j| j.time < t);
        self.jumps.get(i).filter(|j| j.time == t)
    }

    /// Jumps with `start < time <= end`.
    pub fn within(&self, start: f64, end: f64) -> &[ScheduledJump] {
        let lo = self.jumps.partition_point(|j| j.time <= start);
        let hi = self.jumps.partition_point(|j| j.time <= end);
        &self.jumps[lo..hi.max(lo)]
    }

    /// Skeleton time `t_n`: `0` for `n = 0`, otherwise the `n`-th jump in time.
    pub fn skeleton_time(&self, n: usize) -> Option<f64> {
        if n == 0 {
            Some(0.0)
        } else {
            self.jumps.get(n - 1).map(|j| j.time)
        }
    }
}

/// Generates the truncated jump list in ascending time.
pub fn generate_schedule(schedule: &JumpSchedule) -> Result<GeneratedSchedule, SystemError> {
    schedule.validate()?;
    let delta = schedule.delta_min;
    let mut kept: Vec<(usize, f64)> = Vec::new();
    let mut truncated = 0usize;

    match &schedule.kind {
        ScheduleKind::Explicit(times) => {
            let mut sorted: Vec<f64> = Vec::new();
            for (i, &t) in times.iter().enumerate() {
                let k = i + 1;
                if k > schedule.k_max {
                    truncated += 1;
                    continue;
                }
                let pos = sorted.partition_point(|&s| s < t);
                let near = [pos.checked_sub(1), Some(pos)]
                    .into_iter()
                    .flatten()
                    .filter_map(|p| sorted.get(p))
                    .any(|&s| (s - t).abs() < delta || s == t);
                if near {
                    truncated += 1;
                    continue;
                }
                sorted.insert(pos, t);
                kept.push((k, t));
            }
        }
        ScheduleKind::HarmonicToPoint { t_star, c } => {
            let mut prev: Option<f64> = None;
            for k in 1..=schedule.k_max {
                let t = t_star - c / k as f64;
                if t <= 0.0 {
                    truncated += 1;
                    continue;
                }
                // Gaps shrink with k, so the first violation ends the sequence.
                let too_close = t >= *t_star || prev.is_some_and(|p| t - p < delta || t <= p);
                if too_close {
                    truncated += schedule.k_max - k + 1;
                    break;
                }
                kept.push((k, t));
                prev = Some(t);
            }
        }
        ScheduleKind::HarmonicToZero { alpha } => {
            let mut prev: Option<f64> = None;
            for k in 1..=schedule.k_max {
                let t = alpha / k as f64;
                let too_close = t <= 0.0 || prev.is_some_and(|p| p - t < delta || t >= p);
                if too_close {
                    truncated += schedule.k_max - k + 1;
                    break;
                }
                kept.push((k, t));
                prev = Some(t);
            }
        }
    }

    if kept.is_empty() {
        return Err(SystemError::EmptySchedule);
    }
    kept.sort_by(|a, b| a.1.total_cmp(&b.1));
    let jumps = kept
        .into_iter()
        .enumerate()
        .map(|(i, (index, time))| ScheduledJump { index, step: i + 1, time })
        .collect();
    Ok(GeneratedSchedule {
        jumps,
        truncated,
        concentration_point: schedule.concentration_point(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pairs(s: &GeneratedSchedule) -> Vec<(usize, f64)> {
        s.jumps().iter().map(|j| (j.index, j.time)).collect()
    }

    #[test]
    fn harmonic_to_point_example() {
        let s = generate_schedule(
            &JumpSchedule::new(ScheduleKind::HarmonicToPoint { t_star: 2.0, c: 1.0 }).with_k_max(3),
        )
        .unwrap();
        let p = pairs(&s);
        assert_eq!(p[0], (1, 1.0));
        assert_eq!(p[1], (2, 1.5));
        assert_eq!(p[2].0, 3);
        assert!((p[2].1 - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.truncated(), 0);
    }

    #[test]
    fn harmonic_to_zero_example() {
        let s = generate_schedule(
            &JumpSchedule::new(ScheduleKind::HarmonicToZero { alpha: 1.0 }).with_k_max(3),
        )
        .unwrap();
        let p = pairs(&s);
        assert_eq!(p.iter().map(|x| x.0).collect::<Vec<_>>(), vec![3, 2, 1]);
        assert!((p[0].1 - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(p[1].1, 0.5);
        assert_eq!(p[2].1, 1.0);
        assert_eq!(s.jumps()[0].step, 1);
    }

    #[test]
    fn empty_explicit_list() {
        let r = generate_schedule(&JumpSchedule::new(ScheduleKind::Explicit(vec![])));
        assert!(matches!(r, Err(SystemError::EmptySchedule)));
    }

    #[test]
    fn gap_truncation() {
        // t_k - t_{k-1} = 1/((k-1)k) drops below 1e-3 first at k = 33.
        let s = generate_schedule(
            &JumpSchedule::new(ScheduleKind::HarmonicToPoint { t_star: 2.0, c: 1.0 })
                .with_k_max(100)
                .with_delta_min(1e-3),
        )
        .unwrap();
        assert_eq!(s.len(), 32);
        assert_eq!(s.truncated(), 68);
    }

    #[test]
    fn explicit_duplicates_dropped() {
        let s = generate_schedule(&JumpSchedule::new(ScheduleKind::Explicit(vec![1.0, 2.0, 1.0, 0.5])))
            .unwrap();
        assert_eq!(pairs(&s), vec![(4, 0.5), (1, 1.0), (2, 2.0)]);
        assert_eq!(s.truncated(), 1);
    }

    #[test]
    fn window_queries() {
        let s = generate_schedule(
            &JumpSchedule::new(ScheduleKind::HarmonicToPoint { t_star: 2.0, c: 1.0 }).with_k_max(4),
        )
        .unwrap();
        assert_eq!(s.within(1.0, 1.75).len(), 3);
        assert_eq!(s.within(0.0, 1.0).len(), 1);
        assert_eq!(s.jump_at(1.5).map(|j| j.index), Some(2));
        assert!(s.jump_at(1.4).is_none());
        assert_eq!(s.skeleton_time(0), Some(0.0));
        assert_eq!(s.skeleton_time(2), Some(1.5));
    }

    proptest! {
        #[test]
        fn harmonic_schedules_strictly_increasing(t_star in 0.5f64..10.0, c in 0.01f64..5.0,
                                                  k_max in 1usize..3000, log_delta in -14f64..-2.0) {
            let sched = JumpSchedule::new(ScheduleKind::HarmonicToPoint { t_star, c })
                .with_k_max(k_max)
                .with_delta_min(10f64.powf(log_delta));
            if let Ok(s) = generate_schedule(&sched) {
                for w in s.jumps().windows(2) {
                    prop_assert!(w[0].time < w[1].time);
                }
                prop_assert!(s.jumps().iter().all(|j| j.time < t_star));
                prop_assert_eq!(s.len() + s.truncated(), k_max);
            }
        }

        #[test]
        fn explicit_schedules_strictly_increasing(times in proptest::collection::vec(0.001f64..10.0, 0..50)) {
            if let Ok(s) = generate_schedule(&JumpSchedule::new(ScheduleKind::Explicit(times))) {
                for w in s.jumps().windows(2) {
                    prop_assert!(w[1].time - w[0].time >= DEFAULT_DELTA_MIN);
                }
            }
        }
    }
}
