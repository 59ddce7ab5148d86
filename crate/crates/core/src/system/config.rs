//! JSON model configuration.
//!
//! Any value may be written plainly or as `{"value": …, "source": "…"}`; the
//! source string is carried through unchanged so emitted configs can record
//! where each number came from. Regime and mark indices are 1-based here and
//! 0-based in [`SystemSpec`]. Unknown keys are rejected.

use std::fmt;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use super::{
    AffineJump, CoefficientFamily, CoefficientKind, ExponentSign, JumpFamily, JumpSchedule,
    ScheduleKind, SwitchingKernel, SystemError, SystemParts, SystemSpec, UserConstants,
    DEFAULT_DELTA_MIN, DEFAULT_K_MAX,
};
use crate::markov::{GeneratorMatrix, MarkChain, TransitionMatrix};
use crate::simulate::IntegratorConfig;

/// Source tag for values the model leaves unspecified and presets fill in.
pub const SOURCE_UNSPECIFIED: &str = "default-unspecified-in-paper";

#[derive(Debug, Clone, PartialEq)]
pub struct Annotated<T> {
    pub value: T,
    pub source: Option<String>,
}

impl<T> Annotated<T> {
    pub fn plain(value: T) -> Self {
        Annotated { value, source: None }
    }

    pub fn sourced(value: T, source: impl Into<String>) -> Self {
        Annotated { value, source: Some(source.into()) }
    }
}

impl<T> From<T> for Annotated<T> {
    fn from(value: T) -> Self {
        Annotated::plain(value)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AnnotatedRepr<T> {
    Sourced {
        value: T,
        source: String,
    },
    Plain(T),
}

impl<'de, T: DeserializeOwned> Deserialize<'de> for Annotated<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        // Buffer first so a failing plain parse can report the real cause.
        let raw = serde_json::Value::deserialize(d)?;
        if let serde_json::Value::Object(map) = &raw {
            if map.contains_key("value") || map.contains_key("source") {
                let unknown: Vec<&String> =
                    map.keys().filter(|k| *k != "value" && *k != "source").collect();
                if !unknown.is_empty() {
                    return Err(serde::de::Error::custom(format!(
                        "unknown field `{}` in annotated value, expected `value` or `source`",
                        unknown[0]
                    )));
                }
            }
        }
        match serde_json::from_value::<AnnotatedRepr<T>>(raw.clone()) {
            Ok(AnnotatedRepr::Sourced { value, source }) => Ok(Annotated::sourced(value, source)),
            Ok(AnnotatedRepr::Plain(value)) => Ok(Annotated::plain(value)),
            Err(_) => serde_json::from_value::<T>(raw)
                .map(Annotated::plain)
                .map_err(serde::de::Error::custom),
        }
    }
}

impl<T: Serialize> Serialize for Annotated<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Sourced<'a, T> {
            value: &'a T,
            source: &'a str,
        }
        match &self.source {
            Some(source) => Sourced { value: &self.value, source }.serialize(s),
            None => self.value.serialize(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientConfig {
    pub kind: CoefficientKind,
    /// One entry per regime.
    pub coefficients: Annotated<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpConfig {
    Zero,
    ScalePoly,
    ExpMarkClamped {
        alpha: Annotated<f64>,
        #[serde(default = "one")]
        scale: Annotated<f64>,
        /// `-1` for `e^{-αkη}`, `1` for `e^{+αkη}`.
        sign: Annotated<ExponentSign>,
    },
    CustomSequence {
        maps: Vec<AffineJump>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        constants: Option<UserConstants>,
    },
}

fn one() -> Annotated<f64> {
    Annotated::plain(1.0)
}

fn default_k_max() -> usize {
    DEFAULT_K_MAX
}

fn default_delta_min() -> f64 {
    DEFAULT_DELTA_MIN
}

/// Jump times plus truncation (`k_max`, `delta_min`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleConfig {
    Explicit {
        times: Annotated<Vec<f64>>,
        #[serde(default = "default_k_max")]
        k_max: usize,
        #[serde(default = "default_delta_min")]
        delta_min: f64,
    },
    HarmonicToPoint {
        t_star: Annotated<f64>,
        c: Annotated<f64>,
        #[serde(default = "default_k_max")]
        k_max: usize,
        #[serde(default = "default_delta_min")]
        delta_min: f64,
    },
    HarmonicToZero {
        alpha: Annotated<f64>,
        #[serde(default = "default_k_max")]
        k_max: usize,
        #[serde(default = "default_delta_min")]
        delta_min: f64,
    },
}

impl ScheduleConfig {
    pub fn k_max(&self) -> usize {
        match self {
            ScheduleConfig::Explicit { k_max, .. }
            | ScheduleConfig::HarmonicToPoint { k_max, .. }
            | ScheduleConfig::HarmonicToZero { k_max, .. } => *k_max,
        }
    }

    pub fn set_k_max(&mut self, value: usize) {
        match self {
            ScheduleConfig::Explicit { k_max, .. }
            | ScheduleConfig::HarmonicToPoint { k_max, .. }
            | ScheduleConfig::HarmonicToZero { k_max, .. } => *k_max = value,
        }
    }

    fn to_schedule(&self) -> JumpSchedule {
        let (kind, k_max, delta_min) = match self {
            ScheduleConfig::Explicit { times, k_max, delta_min } => {
                (ScheduleKind::Explicit(times.value.clone()), *k_max, *delta_min)
            }
            ScheduleConfig::HarmonicToPoint { t_star, c, k_max, delta_min } => (
                ScheduleKind::HarmonicToPoint { t_star: t_star.value, c: c.value },
                *k_max,
                *delta_min,
            ),
            ScheduleConfig::HarmonicToZero { alpha, k_max, delta_min } => {
                (ScheduleKind::HarmonicToZero { alpha: alpha.value }, *k_max, *delta_min)
            }
        };
        JumpSchedule::new(kind).with_k_max(k_max).with_delta_min(delta_min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XiConfig {
    pub matrix: Annotated<Vec<Vec<f64>>>,
    /// Affine state map applied on a switch `i -> j`, row `i` column `j`.
    /// Omitted means the identity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub switching_kernel: Option<Vec<Vec<AffineJump>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaConfig {
    /// Numeric value of each mark state.
    pub values: Annotated<Vec<f64>>,
    /// Per-step transition matrices; the last one repeats.
    pub matrices: Annotated<Vec<Vec<Vec<f64>>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub x0: Annotated<Vec<f64>>,
    /// 1-based regime.
    pub y0: Annotated<usize>,
    /// 1-based mark state.
    pub h0: Annotated<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub drift: CoefficientConfig,
    pub diffusion: CoefficientConfig,
    pub jump: JumpConfig,
    pub schedule: ScheduleConfig,
    pub xi_generator: XiConfig,
    pub eta_transition: EtaConfig,
    pub initial: InitialConfig,
    pub horizon: Annotated<f64>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid config field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

impl ConfigError {
    fn invalid(field: &str, message: impl fmt::Display) -> Self {
        ConfigError::Invalid { field: field.to_string(), message: message.to_string() }
    }
}

/// A validated model ready to simulate.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedModel {
    pub spec: SystemSpec,
    pub integrator: IntegratorConfig,
    pub horizon: f64,
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Pretty JSON with every default written out.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn build(&self) -> Result<ResolvedModel, ConfigError> {
        let coeffs = |c: &CoefficientConfig| CoefficientFamily::new(c.kind, c.coefficients.value.clone());
        let drift = coeffs(&self.drift);
        let diffusion = coeffs(&self.diffusion);

        let jump = match &self.jump {
            JumpConfig::Zero => JumpFamily::Zero,
            JumpConfig::ScalePoly => JumpFamily::ScalePoly,
            JumpConfig::ExpMarkClamped { alpha, scale, sign } => JumpFamily::ExpMarkClamped {
                alpha: alpha.value,
                scale: scale.value,
                sign: sign.value,
            },
            JumpConfig::CustomSequence { maps, constants } => {
                JumpFamily::CustomSequence { maps: maps.clone(), constants: constants.clone() }
            }
        };

        let schedule = self.schedule.to_schedule();

        let xi = GeneratorMatrix::try_from(self.xi_generator.matrix.value.clone())
            .map_err(|e| ConfigError::invalid("xi_generator.matrix", e))?;
        let switching = match &self.xi_generator.switching_kernel {
            None => None,
            Some(rows) => {
                let n = xi.n_states();
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(ConfigError::invalid(
                        "xi_generator.switching_kernel",
                        format!("expected a {n}x{n} grid"),
                    ));
                }
                let mut kernel = SwitchingKernel::identity(n);
                for (i, row) in rows.iter().enumerate() {
                    for (j, m) in row.iter().enumerate() {
                        kernel.set(i, j, *m);
                    }
                }
                Some(kernel)
            }
        };

        let transition = TransitionMatrix::per_step(self.eta_transition.matrices.value.clone())
            .map_err(|e| ConfigError::invalid("eta_transition.matrices", e))?;
        let eta = MarkChain::new(self.eta_transition.values.value.clone(), transition)
            .map_err(|e| ConfigError::invalid("eta_transition.values", e))?;

        let y0 = self.initial.y0.value;
        let h0 = self.initial.h0.value;
        if y0 == 0 {
            return Err(ConfigError::invalid("initial.y0", "regimes are numbered from 1"));
        }
        if h0 == 0 {
            return Err(ConfigError::invalid("initial.h0", "mark states are numbered from 1"));
        }

        let horizon = self.horizon.value;
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(ConfigError::invalid("horizon", format!("must be positive, got {horizon}")));
        }
        self.integrator.validate().map_err(|e| ConfigError::invalid("integrator", e))?;

        let spec = SystemSpec::new(SystemParts {
            drift,
            diffusion,
            jump,
            schedule,
            xi,
            switching,
            eta,
            x0: self.initial.x0.value.clone(),
            y0: y0 - 1,
            h0: h0 - 1,
        })
        .map_err(|e| ConfigError::invalid(system_error_field(&e), e))?;

        Ok(ResolvedModel { spec, integrator: self.integrator.clone(), horizon })
    }
}

fn system_error_field(e: &SystemError) -> &'static str {
    match e {
        SystemError::RegimeCountMismatch { .. } => "drift/diffusion",
        SystemError::InvalidInitial(_) => "initial",
        SystemError::InvalidSchedule(_) | SystemError::EmptySchedule => "schedule",
        SystemError::InvalidParameter(_) | SystemError::UnsupportedFamily(_) => "jump",
        _ => "model",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "drift": {"kind": "linear", "coefficients": [-1.0]},
        "diffusion": {"kind": "linear", "coefficients": {"value": [0.3], "source": "test"}},
        "jump": {"kind": "zero"},
        "schedule": {"kind": "explicit", "times": [0.5]},
        "xi_generator": {"matrix": [[0.0]]},
        "eta_transition": {"values": [1.0], "matrices": [[[1.0]]]},
        "initial": {"x0": [1.0], "y0": 1, "h0": 1},
        "horizon": 1.0
    }"#;

    #[test]
    fn parses_and_materializes_defaults() {
        let cfg = ModelConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.diffusion.coefficients.source.as_deref(), Some("test"));
        let model = cfg.build().unwrap();
        assert_eq!(model.horizon, 1.0);
        assert_eq!(model.spec.schedule().len(), 1);
        let text = cfg.to_json();
        assert!(text.contains("\"k_max\": 200"));
        assert!(text.contains("\"overflow_threshold\""));
        let again = ModelConfig::from_json(&text).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_json(), text);
    }

    #[test]
    fn unknown_key_rejected_with_position() {
        let bad = MINIMAL.replace("\"horizon\": 1.0", "\"horizon\": 1.0, \"horizn\": 2");
        match ModelConfig::from_json(&bad) {
            Err(ConfigError::Parse { line, message, .. }) => {
                assert!(line > 1);
                assert!(message.contains("horizn"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn invalid_generator_names_field() {
        let bad = MINIMAL.replace("[[0.0]]", "[[-1.0, 0.5], [1.0, -1.0]]");
        let err = ModelConfig::from_json(&bad).unwrap().build().unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { ref field, .. } if field == "xi_generator.matrix"));
    }

    #[test]
    fn zero_based_index_rejected() {
        let bad = MINIMAL.replace("\"y0\": 1", "\"y0\": 0");
        let err = ModelConfig::from_json(&bad).unwrap().build().unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { ref field, .. } if field == "initial.y0"));
    }

    #[test]
    fn annotated_rejects_stray_keys() {
        let bad = MINIMAL.replace("\"source\": \"test\"", "\"source\": \"test\", \"note\": 1");
        assert!(ModelConfig::from_json(&bad).is_err());
    }
}
