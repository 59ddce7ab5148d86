//! Command execution. Every command produces its output files in memory so
//! that `rerun` can hash them against a manifest before anything is written.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use zeno_core::analysis::{
    detect_blowup, probe_asymptotic_in_probability, probe_mean_square, probe_stability_in_probability,
    probe_supermartingale, verify_theorem1_bound, AnalysisError,
};
use zeno_core::lyapunov::{default_x_grid, theorem6_check, EpsilonChoice, LyapunovSpec};
use zeno_core::simulate::{simulate_path, with_threads, PathStatus, RngPolicy};
use zeno_core::system::{check_conditions, ModelConfig, ResolvedModel, DEFAULT_EPS_GRID};

use crate::args::ProbeKindArg;
use crate::manifest::Invocation;
use crate::render;
use crate::CliError;

/// How a successful run ended, beyond plain success.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// At least one simulated path crossed the overflow threshold.
    Exploded,
    /// A checked condition or probe verdict failed.
    Finding,
}

pub struct Execution {
    pub files: Vec<(String, Vec<u8>)>,
    pub text: String,
    pub outcome: Outcome,
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s.into_bytes()
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    write(&mut buf).expect("writing to memory");
    buf
}

fn resolve(config: &ModelConfig) -> Result<ResolvedModel, CliError> {
    config.build().map_err(|e| CliError::Config(e.to_string()))
}

fn analysis_error(e: AnalysisError) -> CliError {
    CliError::Config(e.to_string())
}

fn finding_if(fails: bool) -> Outcome {
    if fails {
        Outcome::Finding
    } else {
        Outcome::Ok
    }
}

pub fn execute(invocation: &Invocation, config: &ModelConfig, threads: Option<usize>) -> Result<Execution, CliError> {
    let model = resolve(config)?;
    match invocation {
        Invocation::Simulate { seed, paths } => with_threads(threads, || simulate(&model, *seed, *paths)),
        Invocation::Check { epsilon } => check(&model, *epsilon),
        Invocation::Probe { .. } => with_threads(threads, || probe(&model, invocation)),
    }
}

fn simulate(model: &ResolvedModel, seed: u64, paths: u64) -> Result<Execution, CliError> {
    let policy = RngPolicy::new(seed);
    let trajectories: Vec<_> = (0..paths)
        .into_par_iter()
        .map(|i| simulate_path(&model.spec, &model.integrator, model.horizon, i, &policy))
        .collect();
    let mut files = Vec::with_capacity(trajectories.len() + 1);
    let mut text = String::new();
    let mut statuses = Vec::with_capacity(trajectories.len());
    for (i, tr) in trajectories.iter().enumerate() {
        files.push((format!("traj_{i}.csv"), csv_bytes(|b| tr.write_csv(b))));
        statuses.push(json!({ "path": i, "status": tr.status, "jumps": tr.jump_events.len() }));
        if let PathStatus::Exploded { time } = tr.status {
            text.push_str(&format!("path {i}: exploded at t = {}\n", render::num(time)));
        }
    }
    let exploded = trajectories.iter().filter(|t| t.status.exploded()).count();
    files.push(("status.json".into(), json_bytes(&statuses)));
    text.push_str(&format!(
        "simulated {paths} path(s) on [0, {}]; {exploded} exploded (threshold {})\n",
        render::num(model.horizon),
        render::num(model.integrator.overflow_threshold)
    ));
    Ok(Execution { files, text, outcome: if exploded > 0 { Outcome::Exploded } else { Outcome::Ok } })
}

fn check(model: &ResolvedModel, epsilon: Option<f64>) -> Result<Execution, CliError> {
    let conditions = check_conditions(&model.spec, &DEFAULT_EPS_GRID).map_err(|e| CliError::Config(e.to_string()))?;
    let eps = epsilon.map_or(EpsilonChoice::Search, EpsilonChoice::Fixed);
    let stability = theorem6_check(&model.spec, eps, &default_x_grid());
    let pass = conditions.all_pass && stability.as_ref().is_ok_and(|r| r.pass);
    let text = render::check(&model.spec, &conditions, &stability, pass);
    let report = json!({
        "conditions": conditions,
        "stability": match &stability {
            Ok(r) => json!(r),
            Err(e) => json!({ "not_applicable": e.to_string() }),
        },
        "pass": pass,
    });
    Ok(Execution { files: vec![("report.json".into(), json_bytes(&report))], text, outcome: finding_if(!pass) })
}

fn probe(model: &ResolvedModel, invocation: &Invocation) -> Result<Execution, CliError> {
    let Invocation::Probe {
        seed,
        kind,
        paths,
        horizon,
        segment,
        kmax,
        eps1,
        delta,
        times,
        inner,
        k_from,
        k_to,
        gamma,
        beta,
    } = invocation
    else {
        unreachable!("probe invocation")
    };
    let (spec, cfg) = (&model.spec, &model.integrator);
    let policy = RngPolicy::new(*seed);
    match kind {
        ProbeKindArg::Bound => {
            let r = verify_theorem1_bound(spec, cfg, *segment, *paths, &policy).map_err(analysis_error)?;
            Ok(Execution {
                text: render::bound(&r),
                files: vec![("bound.json".into(), json_bytes(&r))],
                outcome: finding_if(!r.pass),
            })
        }
        ProbeKindArg::Prob => {
            let h = horizon.unwrap_or_else(|| spec.default_probe_horizon());
            let r = probe_stability_in_probability(spec, cfg, *eps1, h, *paths, delta, &policy)
                .map_err(analysis_error)?;
            Ok(Execution {
                text: render::probe(&r),
                files: vec![
                    ("prob.json".into(), json_bytes(&r)),
                    ("prob.csv".into(), csv_bytes(|b| r.write_csv(b))),
                ],
                outcome: finding_if(!r.verdict),
            })
        }
        ProbeKindArg::Asymptotic => {
            let r = probe_asymptotic_in_probability(spec, cfg, *eps1, times, *paths, &policy).map_err(analysis_error)?;
            Ok(Execution {
                text: render::probe(&r),
                files: vec![
                    ("asymptotic.json".into(), json_bytes(&r)),
                    ("asymptotic.csv".into(), csv_bytes(|b| r.write_csv(b))),
                ],
                outcome: finding_if(!r.verdict),
            })
        }
        ProbeKindArg::Meansq => {
            let r = probe_mean_square(spec, cfg, times, *paths, &policy).map_err(analysis_error)?;
            Ok(Execution {
                text: render::probe(&r),
                files: vec![
                    ("meansq.json".into(), json_bytes(&r)),
                    ("meansq.csv".into(), csv_bytes(|b| r.write_csv(b))),
                ],
                outcome: finding_if(!r.verdict),
            })
        }
        ProbeKindArg::Supermartingale => {
            let v = LyapunovSpec::Power { gamma: *gamma, beta: *beta };
            let r = probe_supermartingale(spec, cfg, &v, *k_from..=*k_to, *paths, *inner, &policy)
                .map_err(analysis_error)?;
            Ok(Execution {
                text: render::supermartingale(&r),
                files: vec![
                    ("supermartingale.json".into(), json_bytes(&r)),
                    ("supermartingale.csv".into(), csv_bytes(|b| r.write_csv(b))),
                ],
                outcome: finding_if(!r.pass),
            })
        }
        ProbeKindArg::Blowup => {
            let h = horizon.unwrap_or(model.horizon);
            let r = detect_blowup(spec, cfg, kmax, h, *paths, &policy).map_err(analysis_error)?;
            Ok(Execution {
                text: render::blowup(&r),
                files: vec![
                    ("blowup.json".into(), json_bytes(&r)),
                    ("blowup.csv".into(), csv_bytes(|b| r.write_csv(b))),
                ],
                outcome: finding_if(r.blowup),
            })
        }
    }
}
