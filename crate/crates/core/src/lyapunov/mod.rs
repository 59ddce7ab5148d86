//! Lyapunov functions, the discrete Lyapunov operator, the weak infinitesimal
//! operator, and closed-form stability conditions for linear systems.

mod bounds;
mod function;
mod operator;
mod theorem6;

use thiserror::Error;

pub use bounds::{check_quadratic_bounds, QuadraticBounds, QuadraticCheck, QuadraticGrid, QuadraticViolation, SLOPE_TOLERANCE};
pub use function::{ClosureFn, ConstantFn, LyapunovSpec, Point, RadialPower, SmoothFunction};
pub use operator::{
    discrete_lyapunov_operator, power_diffusion_term, wio_evaluate, wio_finite_difference_oracle, OperatorState,
    WioTerms, MC_CHUNK,
};
pub use theorem6::{
    check_condition_47, default_x_grid, epsilon_search_grid, regime_conditions, symmetric_log_grid, theorem6_check,
    Condition47Report, EpsilonChoice, RegimeConditions, RegimeRow, Theorem6Report, Witness,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LyapunovError {
    #[error("segment {k} is not available; the schedule has {available} jumps")]
    InvalidSegment { k: usize, available: usize },
    #[error("test function does not provide its {0}")]
    MissingDerivatives(&'static str),
    #[error("diffusion coefficient of regime {regime} is zero")]
    ZeroDiffusion { regime: usize },
    #[error("x grid has no nonzero points")]
    EmptyGrid,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
