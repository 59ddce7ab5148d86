use serde::{Deserialize, Serialize};

/// How a per-regime coefficient acts on the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientKind {
    /// `f(x)_j = c_i * x_j`
    Linear,
    /// `f(x)_j = c_i`
    Constant,
}

/// Drift or diffusion coefficient with one parameter per regime.
///
/// Diffusion is diagonal: component `j` of the state is driven by its own
/// Wiener process with intensity `f(x)_j`, so the Frobenius norm of the
/// diffusion matrix equals the Euclidean norm of the component vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientFamily {
    kind: CoefficientKind,
    coefficients: Vec<f64>,
}

impl CoefficientFamily {
    pub fn new(kind: CoefficientKind, coefficients: Vec<f64>) -> Self {
        CoefficientFamily { kind, coefficients }
    }

    pub fn linear(coefficients: Vec<f64>) -> Self {
        Self::new(CoefficientKind::Linear, coefficients)
    }

    pub fn constant(coefficients: Vec<f64>) -> Self {
        Self::new(CoefficientKind::Constant, coefficients)
    }

    pub fn kind(&self) -> CoefficientKind {
        self.kind
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn n_regimes(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficient(&self, regime: usize) -> f64 {
        self.coefficients[regime]
    }

    /// Value of component `j` given that component's state `xj`.
    #[inline]
    pub fn component(&self, regime: usize, xj: f64) -> f64 {
        let c = self.coefficients[regime];
        match self.kind {
            CoefficientKind::Linear => c * xj,
            CoefficientKind::Constant => c,
        }
    }

    /// Derivative of `component` with respect to `xj`.
    #[inline]
    pub fn component_slope(&self, regime: usize) -> f64 {
        match self.kind {
            CoefficientKind::Linear => self.coefficients[regime],
            CoefficientKind::Constant => 0.0,
        }
    }

    /// Smallest `G` with `‖f(x)‖² <= G (1 + ‖x‖²)` in regime `regime`.
    pub fn growth_sq(&self, regime: usize, dim: usize) -> f64 {
        let c = self.coefficients[regime];
        match self.kind {
            CoefficientKind::Linear => c * c,
            CoefficientKind::Constant => dim as f64 * c * c,
        }
    }

    /// Squared Lipschitz constant in regime `regime`.
    pub fn lipschitz_sq(&self, regime: usize) -> f64 {
        let s = self.component_slope(regime);
        s * s
    }

    pub fn scaled(&self, factor: f64) -> Self {
        CoefficientFamily {
            kind: self.kind,
            coefficients: self.coefficients.iter().map(|c| c * factor).collect(),
        }
    }
}
