//! Impulse families `g(t_k, y, η, x)` applied at scheduled jump times.

use serde::{Deserialize, Serialize};

use super::sequence::Sequence;
use super::SystemError;
use crate::markov::MarkChain;

/// Direction of the exponential factor `e^{±α k η}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum ExponentSign {
    Decaying,
    Growing,
}

impl ExponentSign {
    pub fn as_f64(self) -> f64 {
        match self {
            ExponentSign::Decaying => -1.0,
            ExponentSign::Growing => 1.0,
        }
    }
}

impl TryFrom<i8> for ExponentSign {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, Self::Error> {
        match v {
            -1 => Ok(ExponentSign::Decaying),
            1 => Ok(ExponentSign::Growing),
            other => Err(format!("sign must be -1 or 1, got {other}")),
        }
    }
}

impl From<ExponentSign> for i8 {
    fn from(s: ExponentSign) -> i8 {
        match s {
            ExponentSign::Decaying => -1,
            ExponentSign::Growing => 1,
        }
    }
}

/// `g(x)_j = scale * x_j + shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineJump {
    pub scale: f64,
    #[serde(default)]
    pub shift: f64,
}

impl AffineJump {
    pub const IDENTITY: AffineJump = AffineJump { scale: 1.0, shift: 0.0 };

    #[inline]
    pub fn apply(&self, v: f64) -> f64 {
        self.scale * v + self.shift
    }
}

/// Constants supplied with a custom sequence: `L_k` and `γ_k` for
/// `k = 1..=len`, zero afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserConstants {
    pub lipschitz: Vec<f64>,
    pub gamma: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum JumpFamily {
    /// No impulse.
    Zero,
    /// `g = k² x`: the state is multiplied by `1 + k²`.
    ScalePoly,
    /// `g = scale * e^{sign α k η} * sat(x)`, where `sat` clamps each
    /// component to `[-1, 1]`.
    ExpMarkClamped { alpha: f64, scale: f64, sign: ExponentSign },
    /// Explicit affine map for jump `k` (1-based); no impulse past the list.
    CustomSequence { maps: Vec<AffineJump>, constants: Option<UserConstants> },
}

/// Exponents above this are factored out before exponentiating, so squared
/// norms stay finite.
const EXP_SAFE: f64 = 300.0;

#[inline]
fn saturate(v: f64) -> f64 {
    v.clamp(-1.0, 1.0)
}

impl JumpFamily {
    pub fn validate(&self) -> Result<(), SystemError> {
        match self {
            JumpFamily::ExpMarkClamped { alpha, scale, .. } => {
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return Err(SystemError::InvalidParameter(format!(
                        "jump alpha must be positive and finite, got {alpha}"
                    )));
                }
                if !scale.is_finite() {
                    return Err(SystemError::InvalidParameter("jump scale must be finite".into()));
                }
            }
            JumpFamily::CustomSequence { maps, constants } => {
                if maps.iter().any(|m| !(m.scale.is_finite() && m.shift.is_finite())) {
                    return Err(SystemError::InvalidParameter(
                        "custom jump maps must be finite".into(),
                    ));
                }
                if let Some(c) = constants {
                    if c.lipschitz.iter().chain(&c.gamma).any(|v| !(*v >= 0.0)) {
                        return Err(SystemError::InvalidParameter(
                            "user-supplied jump constants must be nonnegative".into(),
                        ));
                    }
                }
            }
            JumpFamily::Zero | JumpFamily::ScalePoly => {}
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, JumpFamily::Zero)
    }

    fn exponent(alpha: f64, sign: ExponentSign, k: usize, mark: f64) -> f64 {
        sign.as_f64() * alpha * k as f64 * mark
    }

    /// Writes `g(t_k, ·, mark, x)` into `out`.
    pub fn apply(&self, k: usize, mark: f64, x: &[f64], out: &mut [f64]) {
        match self {
            JumpFamily::Zero => out.iter_mut().for_each(|o| *o = 0.0),
            JumpFamily::ScalePoly => {
                let f = (k * k) as f64;
                out.iter_mut().zip(x).for_each(|(o, &v)| *o = f * v);
            }
            JumpFamily::ExpMarkClamped { alpha, scale, sign } => {
                let f = scale * Self::exponent(*alpha, *sign, k, mark).exp();
                out.iter_mut().zip(x).for_each(|(o, &v)| {
                    let s = saturate(v);
                    *o = if s == 0.0 { 0.0 } else { f * s };
                });
            }
            JumpFamily::CustomSequence { maps, .. } => match maps.get(k.wrapping_sub(1)) {
                Some(m) => out.iter_mut().zip(x).for_each(|(o, &v)| *o = m.apply(v)),
                None => out.iter_mut().for_each(|o| *o = 0.0),
            },
        }
    }

    pub fn jump(&self, k: usize, mark: f64, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.apply(k, mark, x, &mut out);
        out
    }

    /// `ln ‖x + g(t_k, ·, mark, x)‖`, evaluated without overflow for the
    /// exponential family.
    pub fn post_jump_log_norm(&self, k: usize, mark: f64, x: &[f64]) -> f64 {
        if let JumpFamily::ExpMarkClamped { alpha, scale, sign } = self {
            let theta = Self::exponent(*alpha, *sign, k, mark);
            if theta > EXP_SAFE {
                // ‖x + s e^θ sat(x)‖ = e^θ ‖s sat(x) + e^{-θ} x‖
                let shrink = (-theta).exp();
                let n2: f64 = x
                    .iter()
                    .map(|&v| {
                        let w = scale * saturate(v) + shrink * v;
                        w * w
                    })
                    .sum();
                if n2 > 0.0 {
                    return theta + 0.5 * n2.ln();
                }
            }
        }
        let g = self.jump(k, mark, x);
        let n2: f64 = x.iter().zip(&g).map(|(a, b)| (a + b) * (a + b)).sum();
        0.5 * n2.ln()
    }

    /// Sequence `L_k` of squared Lipschitz constants in `x`.
    pub fn lipschitz_sequence(&self, marks: &MarkChain, _dim: usize) -> Result<Sequence, SystemError> {
        Ok(match self {
            JumpFamily::Zero => Sequence::Zero,
            JumpFamily::ScalePoly => Sequence::Power { coefficient: 1.0, exponent: 4.0 },
            JumpFamily::ExpMarkClamped { alpha, scale, sign } => {
                if *scale == 0.0 {
                    Sequence::Zero
                } else {
                    let theta = extremal_exponent(*alpha, *sign, marks);
                    let ratio = (2.0 * theta).exp();
                    Sequence::Geometric { first: scale * scale * ratio, ratio }
                }
            }
            JumpFamily::CustomSequence { constants, .. } => match constants {
                Some(c) => Sequence::Finite { terms: c.lipschitz.clone() },
                None => return Err(unsupported_custom()),
            },
        })
    }

    /// Sequence `γ_k = sup_{x, y, η} ‖g(t_k, y, η, x)‖`.
    pub fn gamma_sequence(&self, marks: &MarkChain, dim: usize) -> Result<Sequence, SystemError> {
        Ok(match self {
            JumpFamily::Zero => Sequence::Zero,
            JumpFamily::ScalePoly => Sequence::Infinite,
            JumpFamily::ExpMarkClamped { alpha, scale, sign } => {
                if *scale == 0.0 {
                    Sequence::Zero
                } else {
                    let theta = extremal_exponent(*alpha, *sign, marks);
                    let ratio = theta.exp();
                    Sequence::Geometric { first: scale.abs() * (dim as f64).sqrt() * ratio, ratio }
                }
            }
            JumpFamily::CustomSequence { constants, .. } => match constants {
                Some(c) => Sequence::Finite { terms: c.gamma.clone() },
                None => return Err(unsupported_custom()),
            },
        })
    }
}

fn unsupported_custom() -> SystemError {
    SystemError::UnsupportedFamily(
        "custom jump sequence needs user-supplied lipschitz and gamma constants".into(),
    )
}

/// Largest per-unit-k exponent `sign * α * η` over the mark values.
fn extremal_exponent(alpha: f64, sign: ExponentSign, marks: &MarkChain) -> f64 {
    let s = sign.as_f64();
    marks
        .values()
        .iter()
        .map(|&h| s * alpha * h)
        .fold(f64::NEG_INFINITY, f64::max)
}
