//! Built-in model configurations: the harmonic blow-up example and the three
//! two-regime cases with impulses accumulating at `t* = 2`.
//!
//! Values the model description leaves open carry `SOURCE_UNSPECIFIED`.

use thiserror::Error;

use crate::simulate::IntegratorConfig;
use crate::system::{
    Annotated, CoefficientConfig, CoefficientKind, EtaConfig, ExponentSign, InitialConfig, JumpConfig, ModelConfig,
    ScheduleConfig, XiConfig, DEFAULT_DELTA_MIN, DEFAULT_K_MAX, SOURCE_UNSPECIFIED,
};

pub const PRESET_NAMES: [&str; 4] = ["intro", "case1", "case2", "case3"];

/// Jump-size exponent `α` of the two-regime cases.
pub const CASE_ALPHA: f64 = 1.673;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown preset `{0}`; expected one of intro, case1, case2, case3")]
pub struct UnknownPreset(pub String);

fn src<T>(value: T, source: &str) -> Annotated<T> {
    Annotated::sourced(value, source)
}

fn linear(values: Vec<f64>, source: &str) -> CoefficientConfig {
    CoefficientConfig { kind: CoefficientKind::Linear, coefficients: src(values, source) }
}

fn two_regime(name: &str, a: [f64; 2], b: [f64; 2], sign: ExponentSign) -> ModelConfig {
    let coeffs = format!("{name} coefficients");
    ModelConfig {
        drift: linear(a.to_vec(), &coeffs),
        diffusion: linear(b.to_vec(), &coeffs),
        jump: JumpConfig::ExpMarkClamped {
            alpha: src(CASE_ALPHA, "example jump exponent"),
            scale: Annotated::plain(1.0),
            sign: src(sign, &format!("{name} jump family")),
        },
        schedule: ScheduleConfig::HarmonicToPoint {
            t_star: src(2.0, "example schedule t_k = 2 - 1/k"),
            c: src(1.0, "example schedule t_k = 2 - 1/k"),
            k_max: DEFAULT_K_MAX,
            delta_min: DEFAULT_DELTA_MIN,
        },
        xi_generator: XiConfig { matrix: src(vec![vec![-1.0, 1.0], vec![1.0, -1.0]], SOURCE_UNSPECIFIED), switching_kernel: None },
        eta_transition: EtaConfig {
            values: src(vec![1.0, 2.0], SOURCE_UNSPECIFIED),
            matrices: src(vec![vec![vec![0.5, 0.5], vec![0.5, 0.5]]], SOURCE_UNSPECIFIED),
        },
        initial: InitialConfig {
            x0: src(vec![10.0], "example initial value"),
            y0: src(1, SOURCE_UNSPECIFIED),
            h0: src(1, "example initial mark"),
        },
        horizon: src(5.0, "example plotting window"),
        integrator: IntegratorConfig::default(),
    }
}

fn intro() -> ModelConfig {
    ModelConfig {
        drift: linear(vec![-1.0], "blow-up example drift"),
        diffusion: linear(vec![0.0], "blow-up example is deterministic"),
        jump: JumpConfig::ScalePoly,
        schedule: ScheduleConfig::HarmonicToZero {
            alpha: src(1.0, "blow-up example t_k = alpha/k"),
            k_max: DEFAULT_K_MAX,
            delta_min: DEFAULT_DELTA_MIN,
        },
        xi_generator: XiConfig { matrix: src(vec![vec![0.0]], "single regime"), switching_kernel: None },
        eta_transition: EtaConfig { values: src(vec![1.0], "no marks"), matrices: src(vec![vec![vec![1.0]]], "no marks") },
        initial: InitialConfig {
            x0: src(vec![1.0], SOURCE_UNSPECIFIED),
            y0: Annotated::plain(1),
            h0: Annotated::plain(1),
        },
        horizon: src(3.0, SOURCE_UNSPECIFIED),
        integrator: IntegratorConfig::default(),
    }
}

pub fn preset(name: &str) -> Result<ModelConfig, UnknownPreset> {
    match name {
        "intro" => Ok(intro()),
        "case1" => Ok(two_regime("case 1", [1.0, -0.5], [0.3, 2.1], ExponentSign::Decaying)),
        "case2" => Ok(two_regime("case 2", [-1.0, 0.5], [0.3, 2.0], ExponentSign::Decaying)),
        "case3" => Ok(two_regime("case 3", [-1.0, 0.5], [0.3, 2.0], ExponentSign::Growing)),
        other => Err(UnknownPreset(other.to_string())),
    }
}
