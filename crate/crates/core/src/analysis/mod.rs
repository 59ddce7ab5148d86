//! Monte Carlo checks of the moment bound, stability probes, the skeleton
//! supermartingale probe and blow-up characterization.
//!
//! Verdicts compare estimates with a 3σ margin so sampling noise does not
//! flip them. Probes over `t >= 0` use a finite horizon, which every report
//! states.

mod blowup;
mod bound;
mod probes;
mod supermartingale;

use thiserror::Error;

pub use blowup::{detect_blowup, BlowupReport, BlowupRow, BLOWUP_CEILING};
pub use bound::{verify_theorem1_bound, BoundCheckResult};
pub use probes::{
    probe_asymptotic_in_probability, probe_mean_square, probe_stability_in_probability, ProbeKind, ProbeRow,
    StabilityProbeResult,
};
pub use supermartingale::{probe_supermartingale, SupermartingaleReport, SupermartingaleRow};

use crate::lyapunov::LyapunovError;
use crate::system::SystemError;

/// Number of standard errors used in every verdict.
pub const SIGMA_MARGIN: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("constants unavailable: {0}")]
    ConstantsUnavailable(String),
    #[error("segment {k} is not available; the schedule has {available} jumps")]
    InvalidSegment { k: usize, available: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Lyapunov(#[from] LyapunovError),
}

/// `a <= b` up to `SIGMA_MARGIN` combined standard errors. Infinite
/// estimates compare as values, so an exploded left side fails.
pub(crate) fn le_within(a: f64, sa: f64, b: f64, sb: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a <= b;
    }
    let s = (sa * sa + sb * sb).sqrt();
    a <= b + SIGMA_MARGIN * if s.is_nan() { 0.0 } else { s }
}
