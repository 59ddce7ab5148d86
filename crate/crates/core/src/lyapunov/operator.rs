//! Discrete Lyapunov operator along the jump skeleton and the weak
//! infinitesimal operator of the hybrid process.

use rayon::prelude::*;
use serde::Serialize;

use super::function::{Point, SmoothFunction};
use super::LyapunovError;
use crate::json;
use crate::simulate::{run_segment, IntegratorConfig, PathState, RngPolicy};
use crate::stats::{Estimate, Welford};
use crate::system::SystemSpec;

/// Samples per rayon task in nested Monte Carlo; fixed so results do not
/// depend on the thread count.
pub const MC_CHUNK: usize = 1024;

/// Mean of `f(i)` over `0..n`, evaluated in fixed chunks and merged in order.
pub(crate) fn chunked_mean(n: u64, f: impl Fn(u64, u64) -> Vec<f64> + Sync) -> Welford {
    let chunk = MC_CHUNK as u64;
    let n_chunks = n.div_ceil(chunk);
    let parts: Vec<Vec<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| f(c, (chunk).min(n - c * chunk)))
        .collect();
    parts.into_iter().flatten().collect()
}

/// Starting point of an operator evaluation; indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorState {
    pub regime: usize,
    pub mark: usize,
    pub x: Vec<f64>,
}

/// `(l v_k)(y, h, x)`: expected `v` at the next skeleton point `t_{k+1}`
/// (after its jump), started from `(y, h, x)` at `t_k`, minus `v(y, h, x)`.
///
/// `k` counts skeleton points in time order with `t_0 = 0`.
#[allow(clippy::too_many_arguments)]
pub fn discrete_lyapunov_operator(
    spec: &SystemSpec,
    cfg: &IntegratorConfig,
    v: &dyn SmoothFunction,
    state: &OperatorState,
    k: usize,
    mc: u64,
    policy: &RngPolicy,
) -> Result<Estimate, LyapunovError> {
    let schedule = spec.schedule();
    let (t0, t1) = match (schedule.skeleton_time(k), schedule.skeleton_time(k + 1)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(LyapunovError::InvalidSegment { k, available: schedule.len() }),
    };
    if mc == 0 {
        return Err(LyapunovError::InvalidParameter("mc must be at least 1".into()));
    }
    let v0 = v.value(&Point::new(t0, state.regime, state.mark, &state.x));
    let w = chunked_mean(mc, |c, len| {
        (0..len)
            .map(|i| {
                let id = c * MC_CHUNK as u64 + i;
                let mut streams = policy.path_streams("lyapunov", &[k as u64, id]);
                let mut s = PathState { t: t0, x: state.x.clone(), regime: state.regime, mark: state.mark };
                let status = run_segment(spec, cfg, &mut s, t1, &[], &mut streams, &mut ());
                if status.exploded() {
                    return f64::INFINITY;
                }
                v.value(&Point::new(t1, s.regime, s.mark, &s.x)) - v0
            })
            .collect()
    });
    Ok(w.estimate())
}

/// The four parts of `𝓛U` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WioTerms {
    #[serde(serialize_with = "json::float")]
    pub time: f64,
    #[serde(serialize_with = "json::float")]
    pub diffusion: f64,
    #[serde(serialize_with = "json::float")]
    pub switching: f64,
    /// Impulse part; nonzero only at scheduled jump times.
    #[serde(serialize_with = "json::float")]
    pub jump: f64,
    #[serde(serialize_with = "json::float")]
    pub total: f64,
}

/// Weak infinitesimal operator `𝓛U = 𝓛_t U + 𝓛_x U + 𝓛_y U + 𝓛_0 U` at
/// `(t, y, h, x)`.
///
/// The switching part uses the generator rates `q̃_ij` with the configured
/// switching kernel; the impulse part averages `U` at the post-jump state over
/// the next mark and is included only when `t` is a scheduled jump time.
pub fn wio_evaluate(
    spec: &SystemSpec,
    u: &dyn SmoothFunction,
    t: f64,
    y: usize,
    h: usize,
    x: &[f64],
) -> Result<WioTerms, LyapunovError> {
    let p = Point::new(t, y, h, x);
    let time = u.time_derivative(&p).ok_or(LyapunovError::MissingDerivatives("time derivative"))?;
    let grad = u.gradient(&p).ok_or(LyapunovError::MissingDerivatives("gradient"))?;
    let hess = u.hessian(&p).ok_or(LyapunovError::MissingDerivatives("hessian"))?;

    let drift = spec.drift();
    let diffusion = spec.diffusion();
    let mut lx = 0.0;
    for (j, &xj) in x.iter().enumerate() {
        let a = drift.component(y, xj);
        let b = diffusion.component(y, xj);
        lx += grad[j] * a + 0.5 * hess[j][j] * b * b;
    }

    let u0 = u.value(&p);
    let mut ly = 0.0;
    let mut moved = x.to_vec();
    for j in 0..spec.n_regimes() {
        let rate = spec.xi().rate(y, j);
        if j == y || rate == 0.0 {
            continue;
        }
        moved.copy_from_slice(x);
        spec.switching().apply(y, j, &mut moved);
        ly += rate * (u.value(&Point::new(t, j, h, &moved)) - u0);
    }

    let mut l0 = 0.0;
    if let Some(jump) = spec.schedule().jump_at(t) {
        let row = &spec.eta().transition().at_step(jump.step)[h];
        let mut post = vec![0.0; x.len()];
        let mut avg = 0.0;
        for (z, &pz) in row.iter().enumerate() {
            if pz == 0.0 {
                continue;
            }
            spec.jump().apply(jump.index, spec.eta().value(z), x, &mut post);
            post.iter_mut().zip(x).for_each(|(g, xi)| *g += xi);
            avg += pz * u.value(&Point::new(t, y, z, &post));
        }
        l0 = avg - u0;
    }

    Ok(WioTerms { time, diffusion: lx, switching: ly, jump: l0, total: time + lx + ly + l0 })
}

/// Monte Carlo difference quotient `(E U(t+dt, X_{t+dt}) - U(t, x)) / dt`
/// over `mc` one-step paths of length `dt`. Intended away from jump times.
#[allow(clippy::too_many_arguments)]
pub fn wio_finite_difference_oracle(
    spec: &SystemSpec,
    u: &dyn SmoothFunction,
    t: f64,
    y: usize,
    h: usize,
    x: &[f64],
    mc: u64,
    dt: f64,
    policy: &RngPolicy,
) -> Estimate {
    let cfg = IntegratorConfig { dt_max: dt, refine_near_star: false, ..IntegratorConfig::default() };
    let u0 = u.value(&Point::new(t, y, h, x));
    let w = chunked_mean(mc, |c, len| {
        let mut streams = policy.path_streams("wio-fd", &[c]);
        (0..len)
            .map(|_| {
                let mut s = PathState { t, x: x.to_vec(), regime: y, mark: h };
                run_segment(spec, &cfg, &mut s, t + dt, &[], &mut streams, &mut ());
                (u.value(&Point::new(t + dt, s.regime, s.mark, &s.x)) - u0) / dt
            })
            .collect()
    });
    w.estimate()
}

/// `𝓛_x` of `γ y |x|^β` for the scalar linear system `dx = a x dt + b x dw`
/// in regime `y` (1-based weight): `γ y β |x|^β (a + (β - 1) b² / 2)`.
pub fn power_diffusion_term(gamma: f64, beta: f64, regime_number: f64, a: f64, b: f64, x: f64) -> f64 {
    gamma * regime_number * beta * x.abs().powf(beta) * (a + (beta - 1.0) * b * b / 2.0)
}
