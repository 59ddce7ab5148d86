//! Simulation and stability analysis for stochastic differential equations
//! with Markov regime switching and impulses at scheduled times, including
//! schedules that accumulate at a finite point.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(a <= b)` deliberately treats NaN as failing.

pub mod analysis;
pub mod json;
pub mod lyapunov;
pub mod markov;
pub mod presets;
pub mod simulate;
pub mod stats;
pub mod system;
