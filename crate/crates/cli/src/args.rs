use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "zeno", version, about = "Simulate and analyze regime-switching SDEs with accumulating impulses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print a built-in model configuration as JSON.
    Preset {
        /// intro, case1, case2 or case3.
        name: String,
    },
    /// Simulate trajectories and write one CSV per path.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Number of trajectories.
        #[arg(long, default_value_t = 1)]
        paths: u64,
        /// Overrides the configured horizon.
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Check the existence conditions and the closed-form stability test.
    Check {
        #[command(flatten)]
        model: ModelArgs,
        /// Fixed ε for the stability test; searched when omitted.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Also write report.json and manifest.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo probe.
    Probe {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        probe: ProbeArgs,
    },
    /// Re-run a command from its manifest and compare output hashes.
    Rerun {
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory; defaults to `rerun/` next to the manifest.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the recorded thread count.
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ModelArgs {
    /// Model configuration file (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in model: intro, case1, case2 or case3.
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeKindArg {
    Bound,
    Prob,
    Asymptotic,
    Meansq,
    Supermartingale,
    Blowup,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(long, value_enum)]
    pub kind: ProbeKindArg,
    /// Paths, or outer paths for the supermartingale probe.
    #[arg(long, default_value_t = 1000)]
    pub paths: u64,
    /// Probe horizon; defaults depend on the kind.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Skeleton segment for the bound probe.
    #[arg(long, default_value_t = 1)]
    pub segment: usize,
    /// Truncation levels for the blow-up probe.
    #[arg(long, value_delimiter = ',', default_value = "5,10,20")]
    pub kmax: Vec<usize>,
    /// Exceedance level for the probability probes.
    #[arg(long, default_value_t = 5.0)]
    pub eps1: f64,
    /// Initial sizes for the stability-in-probability probe.
    #[arg(long, value_delimiter = ',', default_value = "1,0.1,0.01")]
    pub delta: Vec<f64>,
    /// Time grid for the mean-square and asymptotic probes.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,3,5")]
    pub times: Vec<f64>,
    /// Inner continuations per outer path in the supermartingale probe.
    #[arg(long, default_value_t = 100)]
    pub inner: u64,
    /// First and last skeleton index of the supermartingale probe.
    #[arg(long, default_value_t = 1)]
    pub k_from: usize,
    #[arg(long, default_value_t = 20)]
    pub k_to: usize,
    /// Power Lyapunov function `γ (i) ‖x‖^β` for the supermartingale probe.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.025)]
    pub beta: f64,
}
