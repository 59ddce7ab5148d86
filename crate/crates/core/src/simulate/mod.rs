//! Path simulation: Euler–Maruyama between events, exact structure switches
//! from the sampled chain path, and impulses at scheduled jump times.

mod engine;
mod ensemble;
mod rng;
mod trajectory;

pub use engine::{
    run_segment, IntegratorConfig, JumpEvent, PathObserver, PathState, PathStatus, SupTracker,
};
pub use ensemble::{
    ensemble_paths, reduce, simulate_ensemble, summarize_path, uniform_grid, with_threads, EnsembleSummary, GridPoint,
    PathSummary, SupStats,
};
pub use rng::{PathStreams, RngPolicy};
pub use trajectory::{simulate_path, Sample, SampleEvent, Trajectory, PATH_LABEL};
