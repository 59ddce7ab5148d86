//! `zeno`: command-line front end.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 I/O error,
//! 3 a simulated path exploded, 4 a checked condition or verdict failed.

mod args;
mod commands;
mod manifest;
mod render;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;
use zeno_core::presets::preset;
use zeno_core::system::{Annotated, ModelConfig};

use args::{Cli, Command, ModelArgs};
use commands::{execute, Outcome};
use manifest::{read_manifest, write_outputs, Invocation};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io { .. } => 2,
        }
    }
}

fn load_model(m: &ModelArgs) -> Result<ModelConfig, CliError> {
    match (&m.config, &m.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            ModelConfig::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        }
        (None, Some(name)) => preset(name).map_err(|e| CliError::Config(e.to_string())),
        (None, None) => Err(CliError::Config("one of --config or --preset is required".into())),
    }
}

fn run_and_write(
    invocation: Invocation,
    config: &ModelConfig,
    threads: Option<usize>,
    out: Option<&Path>,
) -> Result<Outcome, CliError> {
    let exec = execute(&invocation, config, threads)?;
    print!("{}", exec.text);
    if let Some(dir) = out {
        write_outputs(dir, &invocation, config, threads, &exec.files)?;
    }
    Ok(exec.outcome)
}

fn rerun(manifest_path: &Path, out: Option<PathBuf>, threads: Option<usize>) -> Result<Outcome, CliError> {
    let original = read_manifest(manifest_path)?;
    let dir = out.unwrap_or_else(|| manifest_path.parent().unwrap_or(Path::new(".")).join("rerun"));
    let threads = threads.or(original.threads);
    let exec = execute(&original.invocation, &original.config, threads)?;
    print!("{}", exec.text);
    let fresh = write_outputs(&dir, &original.invocation, &original.config, threads, &exec.files)?;
    let mut matched = 0;
    for entry in &original.outputs {
        match fresh.outputs.iter().find(|e| e.file == entry.file) {
            Some(e) if e.sha256 == entry.sha256 => matched += 1,
            Some(_) => println!("mismatch: {}", entry.file),
            None => println!("missing: {}", entry.file),
        }
    }
    let all = matched == original.outputs.len() && fresh.outputs.len() == original.outputs.len();
    println!("reproduced {matched}/{} outputs in {}", original.outputs.len(), dir.display());
    Ok(if all { Outcome::Ok } else { Outcome::Finding })
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Preset { name } => {
            let cfg = preset(&name).map_err(|e| CliError::Config(e.to_string()))?;
            println!("{}", cfg.to_json());
            Ok(Outcome::Ok)
        }
        Command::Simulate { model, run, paths, horizon } => {
            let mut config = load_model(&model)?;
            if let Some(h) = horizon {
                config.horizon = Annotated::sourced(h, "command line");
            }
            let inv = Invocation::Simulate { seed: run.seed, paths };
            run_and_write(inv, &config, run.threads, Some(&run.out))
        }
        Command::Check { model, epsilon, out } => {
            let config = load_model(&model)?;
            run_and_write(Invocation::Check { epsilon }, &config, None, out.as_deref())
        }
        Command::Probe { model, run, probe: p } => {
            let config = load_model(&model)?;
            let inv = Invocation::Probe {
                seed: run.seed,
                kind: p.kind,
                paths: p.paths,
                horizon: p.horizon,
                segment: p.segment,
                kmax: p.kmax,
                eps1: p.eps1,
                delta: p.delta,
                times: p.times,
                inner: p.inner,
                k_from: p.k_from,
                k_to: p.k_to,
                gamma: p.gamma,
                beta: p.beta,
            };
            run_and_write(inv, &config, run.threads, Some(&run.out))
        }
        Command::Rerun { manifest, out, threads } => rerun(&manifest, out, threads),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Exploded) => ExitCode::from(3),
        Ok(Outcome::Finding) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
