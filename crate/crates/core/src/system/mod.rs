//! System specifications: coefficient families, impulse families, jump
//! schedules, the two driving chains, and the initial condition.

mod coefficients;
pub mod config;
mod constants;
mod jumps;
mod schedule;
mod sequence;

use thiserror::Error;

pub use config::{
    Annotated, CoefficientConfig, ConfigError, EtaConfig, InitialConfig, JumpConfig, ModelConfig, ResolvedModel,
    ScheduleConfig, XiConfig, SOURCE_UNSPECIFIED,
};
pub use coefficients::{CoefficientFamily, CoefficientKind};
pub use constants::{
    check_conditions, check_with_constants, derive_constants, ConcentrationReport, ConcentrationRow,
    ConditionOutcome, ConditionReport, DerivedConstants, DEFAULT_EPS_GRID,
};
pub use jumps::{AffineJump, ExponentSign, JumpFamily, UserConstants};
pub use schedule::{
    generate_schedule, GeneratedSchedule, JumpSchedule, ScheduleKind, ScheduledJump, DEFAULT_DELTA_MIN,
    DEFAULT_K_MAX,
};
pub use sequence::{n_epsilon, Sequence, TAIL_RELATIVE_TOLERANCE};

use crate::markov::{GeneratorMatrix, MarkChain, MarkovError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),
    #[error("tail sum of gamma_k diverges")]
    DivergentTail,
    #[error("epsilon must be positive, got {eps}")]
    NeverReached { eps: f64 },
    #[error("truncation removed every jump")]
    EmptySchedule,
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("regime counts disagree: drift {drift}, diffusion {diffusion}, generator {generator}")]
    RegimeCountMismatch { drift: usize, diffusion: usize, generator: usize },
    #[error("invalid initial condition: {0}")]
    InvalidInitial(String),
    #[error(transparent)]
    Markov(#[from] MarkovError),
}

/// State map applied when the structure switches from regime `i` to `j`.
/// Defaults to the identity (no state jump at a structure change).
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingKernel {
    maps: Vec<Vec<AffineJump>>,
}

impl SwitchingKernel {
    pub fn identity(n: usize) -> Self {
        SwitchingKernel { maps: vec![vec![AffineJump::IDENTITY; n]; n] }
    }

    pub fn set(&mut self, from: usize, to: usize, map: AffineJump) {
        self.maps[from][to] = map;
    }

    pub fn map(&self, from: usize, to: usize) -> AffineJump {
        self.maps[from][to]
    }

    pub fn is_identity(&self) -> bool {
        self.maps.iter().flatten().all(|m| *m == AffineJump::IDENTITY)
    }

    pub fn apply(&self, from: usize, to: usize, x: &mut [f64]) {
        let m = self.maps[from][to];
        if m != AffineJump::IDENTITY {
            x.iter_mut().for_each(|v| *v = m.apply(*v));
        }
    }

    fn n_states(&self) -> usize {
        self.maps.len()
    }
}

/// Everything needed to build a [`SystemSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParts {
    pub drift: CoefficientFamily,
    pub diffusion: CoefficientFamily,
    pub jump: JumpFamily,
    pub schedule: JumpSchedule,
    pub xi: GeneratorMatrix,
    pub switching: Option<SwitchingKernel>,
    pub eta: MarkChain,
    pub x0: Vec<f64>,
    /// Initial regime, zero-based.
    pub y0: usize,
    /// Initial mark state, zero-based.
    pub h0: usize,
}

/// Validated system with its truncated schedule generated once.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    parts: SystemParts,
    switching: SwitchingKernel,
    schedule: GeneratedSchedule,
}

impl SystemSpec {
    pub fn new(parts: SystemParts) -> Result<Self, SystemError> {
        let n = parts.xi.n_states();
        if parts.drift.n_regimes() != n || parts.diffusion.n_regimes() != n {
            return Err(SystemError::RegimeCountMismatch {
                drift: parts.drift.n_regimes(),
                diffusion: parts.diffusion.n_regimes(),
                generator: n,
            });
        }
        let coeffs = parts.drift.coefficients().iter().chain(parts.diffusion.coefficients());
        if coeffs.clone().any(|c| !c.is_finite()) {
            return Err(SystemError::InvalidParameter("coefficients must be finite".into()));
        }
        if parts.x0.is_empty() {
            return Err(SystemError::InvalidInitial("x0 must have at least one component".into()));
        }
        if parts.x0.iter().any(|v| !v.is_finite()) {
            return Err(SystemError::InvalidInitial("x0 must be finite".into()));
        }
        if parts.y0 >= n {
            return Err(SystemError::InvalidInitial(format!(
                "initial regime {} out of range for {n} regimes",
                parts.y0 + 1
            )));
        }
        if parts.h0 >= parts.eta.n_states() {
            return Err(SystemError::InvalidInitial(format!(
                "initial mark {} out of range for {} marks",
                parts.h0 + 1,
                parts.eta.n_states()
            )));
        }
        parts.jump.validate()?;
        let switching = parts.switching.clone().unwrap_or_else(|| SwitchingKernel::identity(n));
        if switching.n_states() != n {
            return Err(SystemError::InvalidParameter(
                "switching kernel size does not match the generator".into(),
            ));
        }
        let schedule = generate_schedule(&parts.schedule)?;
        Ok(SystemSpec { parts, switching, schedule })
    }

    pub fn parts(&self) -> &SystemParts {
        &self.parts
    }

    pub fn into_parts(self) -> SystemParts {
        self.parts
    }

    /// Rebuilds with a different truncation index.
    pub fn with_k_max(&self, k_max: usize) -> Result<Self, SystemError> {
        let mut parts = self.parts.clone();
        parts.schedule.k_max = k_max;
        SystemSpec::new(parts)
    }

    /// Rebuilds with a different initial state.
    pub fn with_x0(&self, x0: Vec<f64>) -> Result<Self, SystemError> {
        let mut parts = self.parts.clone();
        parts.x0 = x0;
        SystemSpec::new(parts)
    }

    pub fn drift(&self) -> &CoefficientFamily {
        &self.parts.drift
    }

    pub fn diffusion(&self) -> &CoefficientFamily {
        &self.parts.diffusion
    }

    pub fn jump(&self) -> &JumpFamily {
        &self.parts.jump
    }

    pub fn schedule(&self) -> &GeneratedSchedule {
        &self.schedule
    }

    pub fn schedule_spec(&self) -> &JumpSchedule {
        &self.parts.schedule
    }

    pub fn xi(&self) -> &GeneratorMatrix {
        &self.parts.xi
    }

    pub fn switching(&self) -> &SwitchingKernel {
        &self.switching
    }

    pub fn eta(&self) -> &MarkChain {
        &self.parts.eta
    }

    pub fn x0(&self) -> &[f64] {
        &self.parts.x0
    }

    pub fn y0(&self) -> usize {
        self.parts.y0
    }

    pub fn h0(&self) -> usize {
        self.parts.h0
    }

    pub fn dim(&self) -> usize {
        self.parts.x0.len()
    }

    pub fn n_regimes(&self) -> usize {
        self.parts.xi.n_states()
    }

    /// `t* + 3` for accumulating schedules, last jump `+ 3` otherwise.
    pub fn default_probe_horizon(&self) -> f64 {
        let anchor = self
            .schedule
            .concentration_point()
            .or_else(|| self.schedule.jumps().last().map(|j| j.time))
            .unwrap_or(0.0);
        anchor + 3.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::TransitionMatrix;
    use proptest::prelude::*;

    pub(crate) fn two_regime(jump: JumpFamily) -> SystemSpec {
        SystemSpec::new(SystemParts {
            drift: CoefficientFamily::linear(vec![-1.0, 0.5]),
            diffusion: CoefficientFamily::linear(vec![0.3, 2.0]),
            jump,
            schedule: JumpSchedule::new(ScheduleKind::HarmonicToPoint { t_star: 2.0, c: 1.0 }),
            xi: GeneratorMatrix::symmetric_two_state(1.0).unwrap(),
            switching: None,
            eta: MarkChain::new(vec![1.0, 2.0], TransitionMatrix::uniform(2)).unwrap(),
            x0: vec![10.0],
            y0: 0,
            h0: 0,
        })
        .unwrap()
    }

    fn decaying() -> JumpFamily {
        JumpFamily::ExpMarkClamped { alpha: 1.673, scale: 1.0, sign: ExponentSign::Decaying }
    }

    #[test]
    fn zero_jump_constants() {
        let c = derive_constants(&two_regime(JumpFamily::Zero)).unwrap();
        for k in 1..50 {
            assert_eq!(c.jump_lipschitz.term(k), 0.0);
            assert_eq!(c.jump_sup.term(k), 0.0);
        }
        assert_eq!(c.growth, 4.25);
        assert_eq!(c.lipschitz, 4.25);
    }

    #[test]
    fn linear_constants_closed_form() {
        let c = derive_constants(&two_regime(decaying())).unwrap();
        let g1 = (-1.673f64).exp();
        assert!((c.growth - (4.25 + g1 * g1)).abs() < 1e-15);
        assert_eq!(c.lipschitz, 4.25);
        assert!((c.jump_sup_sum - g1 / (1.0 - g1)).abs() < 1e-15);
        assert!(!c.jump_sup_divergent);
    }

    #[test]
    fn scale_poly_diverges() {
        let c = derive_constants(&two_regime(JumpFamily::ScalePoly)).unwrap();
        assert!(c.jump_sup_divergent);
        assert!(c.jump_lipschitz_divergent);
        let r = check_with_constants(c, &DEFAULT_EPS_GRID);
        assert!(!r.jump_summability.pass);
        assert!(!r.concentration.pass);
        assert!(r.concentration.rows.iter().all(|row| row.n_eps.is_none()));
    }

    #[test]
    fn concentration_trend_for_decaying_family() {
        let r = check_conditions(&two_regime(decaying()), &DEFAULT_EPS_GRID).unwrap();
        assert!(r.all_pass);
        // Tails e^{-αk}/(1-e^{-α}): 0.2311 at k = 1, 0.0434 at k = 2.
        assert_eq!(r.concentration.rows[0].n_eps, Some(2));
        let n: Vec<usize> = r.concentration.rows.iter().map(|row| row.n_eps.unwrap()).collect();
        assert!(n.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_mismatched_regimes() {
        let mut parts = two_regime(JumpFamily::Zero).into_parts();
        parts.drift = CoefficientFamily::linear(vec![1.0]);
        assert!(matches!(SystemSpec::new(parts), Err(SystemError::RegimeCountMismatch { .. })));
    }

    proptest! {
        // (4)-(6) evaluated directly at random states stay within the derived constants.
        #[test]
        fn derived_constants_bound_direct_evaluation(
            x1 in -1e3f64..1e3, x2 in -1e3f64..1e3, y in 0usize..2, h in 0usize..2, k in 1usize..60,
            sign in prop_oneof![Just(ExponentSign::Decaying), Just(ExponentSign::Growing)],
        ) {
            let spec = two_regime(JumpFamily::ExpMarkClamped { alpha: 1.673, scale: 1.0, sign });
            let c = derive_constants(&spec).unwrap();
            let mark = spec.eta().value(h);
            let a = spec.drift().component(y, x1);
            let b = spec.diffusion().component(y, x1);
            let g = spec.jump().jump(k, mark, &[x1])[0];
            let lhs = a * a + b * b + g * g;
            prop_assert!(lhs <= c.growth * (1.0 + x1 * x1) + 1e-9);

            let da = spec.drift().component(y, x1) - spec.drift().component(y, x2);
            let db = spec.diffusion().component(y, x1) - spec.diffusion().component(y, x2);
            let d2 = (x1 - x2) * (x1 - x2);
            prop_assert!(da * da + db * db <= c.lipschitz * d2 * (1.0 + 1e-12) + 1e-9);

            let dg = g - spec.jump().jump(k, mark, &[x2])[0];
            let lk = c.jump_lipschitz_at(k);
            prop_assert!(dg * dg <= lk * d2 * (1.0 + 1e-12) + 1e-300);
            prop_assert!(g.abs() <= c.jump_sup.term(k) * (1.0 + 1e-12));
        }
    }
}
